//! Experiment driver for the `fdcmac` throughput model: manifest parsing,
//! parameter sweeps and CSV/JSON output.
//!
//! # CSV schema
//!
//! Every analysis writes the columns of [`Row`] in declaration order. Scenario
//! columns come first, then the closed-form report, then optimizer,
//! simulation and diagnostic columns, which stay empty when they do not apply.
//! The final `error` column holds the failure message of a `failed` row.

pub mod error;
pub mod manifest;
pub mod output;
pub mod run;
pub mod sweep;

pub use error::{CliError, ConfigError};
pub use manifest::{Analysis, Format, Manifest, Plan};
pub use run::{Experiment, Optimum, Overrides, Row, RunOutput, Summary};

/// Loads and validates a manifest file.
pub fn load(path: &std::path::Path) -> Result<Experiment, CliError> {
    let source = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Experiment::from_source(&source)?)
}
