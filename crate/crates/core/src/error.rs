use thiserror::Error;

/// Errors raised by the throughput model, its optimizer and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// A configuration value violates a type invariant.
    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// No slot can ever end in a successful reservation.
    #[error("infeasible contention: success probability per slot is zero (n0 = {n0}, p = {p})")]
    InfeasibleContention { n0: u32, p: f64 },

    /// The detection target cannot be bracketed by any threshold.
    #[error("threshold calibration failed: {0}")]
    Calibration(String),

    /// Quadrature or another numerical routine did not reach its tolerance.
    #[error("numerical failure in {what}: residual estimate {residual:e}")]
    Numerical { what: &'static str, residual: f64 },

    /// A closed form produced a value violating its invariant beyond round-off.
    #[error("invariant violated in {what}: {detail}")]
    Invariant { what: &'static str, detail: String },

    /// The single-Q approximation of the average detection probability could not be fitted.
    #[error("pf00 approximation unavailable: {0}")]
    ApproximationUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        function,
        reason: reason.into(),
    }
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}
