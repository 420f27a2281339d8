//! Domain types shared by every part of the model.
//!
//! Time is in seconds and power is linear everywhere inside the crate; the
//! noise power defaults to one so that a power value doubles as an SNR.
//! Decibels only appear at the I/O boundary through [`db_to_linear`] and
//! [`linear_to_db`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> Result<f64> {
    if !(linear > 0.0) || !linear.is_finite() {
        return Err(domain("linear_to_db", format!("value must be positive and finite, got {linear}")));
    }
    Ok(10.0 * linear.log10())
}

/// Self-interference power left after cancellation: `zeta * power^xi`.
pub fn self_interference(power: f64, sic: &SicModel) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(domain("self_interference", format!("power must be non-negative, got {power}")));
    }
    Ok(sic.interference(power))
}

fn check_duration(field: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(invalid(field, format!("duration must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || v.is_nan() {
        return Err(invalid(field, format!("must be > 0, got {v}")));
    }
    Ok(())
}

/// Slot timing and contention inputs of the p-persistent reservation phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionParams {
    /// Number of contending SU pairs.
    pub n0: u32,
    /// Per-slot transmission probability.
    pub p: f64,
    /// Mini-slot duration.
    pub sigma: f64,
    pub difs: f64,
    pub sifs: f64,
    pub rts: f64,
    pub cts: f64,
    pub ack: f64,
    /// Propagation delay.
    pub pd: f64,
}

impl ContentionParams {
    /// Timing used throughout the numerical study: 20 us slots, DIFS = 10 slots,
    /// SIFS = 2 slots, RTS = CTS = ACK = 20 slots, 1 us propagation delay.
    pub fn standard(n0: u32, p: f64) -> Self {
        let sigma = 20e-6;
        Self {
            n0,
            p,
            sigma,
            difs: 10.0 * sigma,
            sifs: 2.0 * sigma,
            rts: 20.0 * sigma,
            cts: 20.0 * sigma,
            ack: 20.0 * sigma,
            pd: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 < 1 {
            return Err(invalid("contention.n0", "at least one SU pair is required"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid("contention.p", format!("must lie in (0, 1], got {}", self.p)));
        }
        for (field, v) in [
            ("contention.sigma", self.sigma),
            ("contention.difs", self.difs),
            ("contention.sifs", self.sifs),
            ("contention.rts", self.rts),
            ("contention.cts", self.cts),
            ("contention.ack", self.ack),
            ("contention.pd", self.pd),
        ] {
            check_duration(field, v)?;
        }
        if self.pd > self.sigma {
            return Err(invalid(
                "contention.pd",
                format!("propagation delay {} exceeds the slot size {}", self.pd, self.sigma),
            ));
        }
        Ok(())
    }
}

/// Primary-user idle/active process with exponential holding times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuModel {
    /// Mean idle duration.
    pub tau_id_bar: f64,
    /// Mean active duration.
    pub tau_ac_bar: f64,
    /// Channel evacuation time.
    pub t_eva: f64,
    /// Received PU power (linear, relative to the noise power).
    pub p_pu: f64,
}

impl PuModel {
    pub fn validate(&self) -> Result<()> {
        check_positive("pu.tau_id_bar", self.tau_id_bar)?;
        check_positive("pu.tau_ac_bar", self.tau_ac_bar)?;
        check_positive("pu.t_eva", self.t_eva)?;
        if !(self.p_pu >= 0.0) || !self.p_pu.is_finite() {
            return Err(invalid("pu.p_pu", format!("must be finite and >= 0, got {}", self.p_pu)));
        }
        if self.tau_id_bar.is_infinite() && self.tau_ac_bar.is_infinite() {
            return Err(invalid("pu", "idle and active means cannot both be infinite"));
        }
        Ok(())
    }

    /// Probability that the channel is idle.
    pub fn p_idle(&self) -> f64 {
        if self.tau_id_bar.is_infinite() {
            return 1.0;
        }
        self.tau_id_bar / (self.tau_id_bar + self.tau_ac_bar)
    }

    /// Probability that the channel is busy.
    pub fn p_busy(&self) -> f64 {
        1.0 - self.p_idle()
    }
}

/// Residual self-interference model `I(P) = zeta * P^xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicModel {
    pub zeta: f64,
    pub xi: f64,
}

impl SicModel {
    pub fn new(zeta: f64, xi: f64) -> Result<Self> {
        let s = Self { zeta, xi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta >= 0.0) || !self.zeta.is_finite() {
            return Err(invalid("sic.zeta", format!("must be finite and >= 0, got {}", self.zeta)));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(invalid("sic.xi", format!("must lie in [0, 1], got {}", self.xi)));
        }
        Ok(())
    }

    /// `zeta * power^xi` for a non-negative power. `0^0` is taken as 1.
    #[inline]
    pub fn interference(&self, power: f64) -> f64 {
        self.zeta * power.powf(self.xi)
    }
}

/// Link direction in the transmission stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TxMode {
    /// One-way transmission, no self-interference in the transmission stage.
    Hdtx,
    /// Two-way transmission, self-interference present in the transmission stage.
    Fdtx,
}

impl TxMode {
    /// Self-interference weight in the transmission stage.
    pub fn theta(self) -> f64 {
        match self {
            TxMode::Hdtx => 0.0,
            TxMode::Fdtx => 1.0,
        }
    }

    /// Number of concurrent data flows in the transmission stage.
    pub fn phi(self) -> f64 {
        match self {
            TxMode::Hdtx => 1.0,
            TxMode::Fdtx => 2.0,
        }
    }
}

impl std::fmt::Display for TxMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TxMode::Hdtx => "hdtx",
            TxMode::Fdtx => "fdtx",
        })
    }
}

impl std::str::FromStr for TxMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hdtx" | "hd" => Ok(TxMode::Hdtx),
            "fdtx" | "fd" => Ok(TxMode::Fdtx),
            other => Err(format!("unknown transmission mode `{other}` (expected hdtx or fdtx)")),
        }
    }
}

/// Data-phase configuration of the winning SU pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessConfig {
    /// Data-phase duration `T`.
    pub t_frame: f64,
    /// Duration of the concurrent sensing+transmission stage.
    pub t_s: f64,
    /// Transmit power during the sensing stage.
    pub p_sen: f64,
    /// Transmit power during the transmission stage (always the cap).
    pub p_dat: f64,
    /// Power cap.
    pub p_max: f64,
    pub mode: TxMode,
}

impl AccessConfig {
    /// Builds a configuration whose transmission-stage power equals the cap.
    pub fn new(t_frame: f64, t_s: f64, p_sen: f64, p_max: f64, mode: TxMode) -> Result<Self> {
        let cfg = Self {
            t_frame,
            t_s,
            p_sen,
            p_dat: p_max,
            p_max,
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("access.t_frame", self.t_frame)?;
        if !self.t_frame.is_finite() {
            return Err(invalid("access.t_frame", "must be finite"));
        }
        if !(self.t_s >= 0.0 && self.t_s <= self.t_frame) {
            return Err(invalid(
                "access.t_s",
                format!("must lie in [0, t_frame = {}], got {}", self.t_frame, self.t_s),
            ));
        }
        if !(self.p_max >= 0.0) || !self.p_max.is_finite() {
            return Err(invalid("access.p_max", format!("must be finite and >= 0, got {}", self.p_max)));
        }
        if !(self.p_sen >= 0.0 && self.p_sen <= self.p_max * (1.0 + 1e-12)) {
            return Err(invalid(
                "access.p_sen",
                format!("must lie in [0, p_max = {}], got {}", self.p_max, self.p_sen),
            ));
        }
        if (self.p_dat - self.p_max).abs() > 1e-12 * self.p_max.max(1.0) {
            return Err(invalid(
                "access.p_dat",
                format!("transmission-stage power {} must equal p_max {}", self.p_dat, self.p_max),
            ));
        }
        Ok(())
    }

    pub fn with_t_s(mut self, t_s: f64) -> Self {
        self.t_s = t_s;
        self
    }

    pub fn with_p_sen(mut self, p_sen: f64) -> Self {
        self.p_sen = p_sen;
        self
    }

    /// Sets the cap and the transmission-stage power together, clamping `p_sen`.
    pub fn with_p_max(mut self, p_max: f64) -> Self {
        self.p_max = p_max;
        self.p_dat = p_max;
        self.p_sen = self.p_sen.min(p_max);
        self
    }
}

/// Energy detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    /// Sampling frequency in Hz.
    pub f_s: f64,
    /// Noise power.
    pub n0_noise: f64,
    /// Required average detection probability.
    pub pd_target: f64,
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("sensing.f_s", self.f_s)?;
        check_positive("sensing.n0_noise", self.n0_noise)?;
        if !(self.pd_target > 0.0 && self.pd_target < 1.0) {
            return Err(invalid(
                "sensing.pd_target",
                format!("must lie in (0, 1), got {}", self.pd_target),
            ));
        }
        Ok(())
    }
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            f_s: 6e6,
            n0_noise: 1.0,
            pd_target: 0.8,
        }
    }
}

/// A complete configuration: contention, PU process, cancellation quality,
/// detector and data-phase settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub contention: ContentionParams,
    pub pu: PuModel,
    pub sic: SicModel,
    pub sensing: SensingConfig,
    pub access: AccessConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.contention.validate()?;
        self.pu.validate()?;
        self.sic.validate()?;
        self.sensing.validate()?;
        self.access.validate()?;
        if !(self.access.t_frame < self.pu.t_eva) {
            return Err(invalid(
                "access.t_frame",
                format!(
                    "data phase {} s must be shorter than the evacuation time {} s",
                    self.access.t_frame, self.pu.t_eva
                ),
            ));
        }
        Ok(())
    }

    pub fn with_access(mut self, access: AccessConfig) -> Self {
        self.access = access;
        self
    }

    pub fn with_t_s(mut self, t_s: f64) -> Self {
        self.access.t_s = t_s;
        self
    }

    pub fn with_p_sen(mut self, p_sen: f64) -> Self {
        self.access.p_sen = p_sen;
        self
    }

    /// Self-interference seen by the sensing receiver.
    pub fn sensing_interference(&self) -> f64 {
        self.sic.interference(self.access.p_sen)
    }
}
