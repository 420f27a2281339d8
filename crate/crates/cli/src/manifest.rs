//! Experiment manifests: a TOML document with one section per model type,
//! optional solver sections and any number of `[[sweep]]` axes.
//!
//! Powers are linear unless the key carries a `_db` suffix. Giving both forms
//! of the same power is an error.

use serde::{Deserialize, Serialize};

use fdcmac::montecarlo::{MultiTransitionPolicy, PuClock, SimConfig};
use fdcmac::optimizer::OptimizerSettings;
use fdcmac::{
    db_to_linear, AccessConfig, ContentionParams, PuModel, Scenario, SensingConfig, SicModel, TxMode,
};

use crate::error::ConfigError;
use crate::sweep::{Axis, SweepAxis};

pub const DEFAULT_CYCLES: u64 = 100_000;
pub const DEFAULT_PROBES: usize = 200;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    /// Closed-form report at each point.
    #[default]
    Eval,
    /// Best `(t_s, p_sen)` at each point.
    Optimize,
    /// Closed form plus a Monte-Carlo run at each point.
    Simulate,
    /// Two-stage protocol against its single-stage and half-duplex variants.
    Compare,
    /// Shape diagnostics of the throughput in the sensing time.
    Verify,
}

impl std::fmt::Display for Analysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Analysis::Eval => "eval",
            Analysis::Optimize => "optimize",
            Analysis::Simulate => "simulate",
            Analysis::Compare => "compare",
            Analysis::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub contention: ContentionSection,
    pub pu: PuSection,
    pub sic: SicSection,
    #[serde(default)]
    pub sensing: SensingSection,
    pub access: AccessSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, rename = "sweep", skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepAxis>,
}

/// Slot timings default to the standard multiples of `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentionSection {
    pub n0: u32,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sifs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rts: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cts: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuSection {
    pub tau_id_bar: f64,
    pub tau_ac_bar: f64,
    pub t_eva: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pu_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SicSection {
    pub zeta: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0_noise_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd_target: Option<f64>,
}

/// `t_s` defaults to the whole frame and `p_sen` to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessSection {
    pub t_frame: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_sen: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_sen_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max_db: Option<f64>,
    pub mode: TxMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_sen_floor_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_sen_step_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts_rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_transition_policy: Option<MultiTransitionPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pu_clock: Option<PuClock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// A manifest with every default filled in and every axis expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub base: Scenario,
    pub axes: Vec<Axis>,
    pub optimizer: OptimizerSettings,
    pub simulation: SimConfig,
    pub probes: usize,
}

fn power(field: &str, linear: Option<f64>, db: Option<f64>, default: Option<f64>) -> Result<f64, ConfigError> {
    match (linear, db, default) {
        (Some(_), Some(_), _) => Err(ConfigError::new(
            field,
            format!("give either `{}` or `{}_db`, not both", leaf(field), leaf(field)),
        )),
        (Some(v), None, _) => Ok(v),
        (None, Some(d), _) => {
            if d.is_nan() {
                return Err(ConfigError::new(&format!("{field}_db"), "must be a number"));
            }
            Ok(db_to_linear(d))
        }
        (None, None, Some(v)) => Ok(v),
        (None, None, None) => Err(ConfigError::new(
            field,
            format!("missing `{}` (or `{}_db`)", leaf(field), leaf(field)),
        )),
    }
}

fn leaf(field: &str) -> &str {
    field.rsplit('.').next().unwrap_or(field)
}

impl Manifest {
    pub fn from_toml(source: &str) -> Result<Self, ConfigError> {
        toml::from_str(source).map_err(|e| ConfigError::from_toml(&e, source))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest types always serialize")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let c = &self.contention;
        let mut contention = ContentionParams::standard(c.n0, c.p);
        if let Some(sigma) = c.sigma {
            contention = ContentionParams {
                sigma,
                difs: 10.0 * sigma,
                sifs: 2.0 * sigma,
                rts: 20.0 * sigma,
                cts: 20.0 * sigma,
                ack: 20.0 * sigma,
                ..contention
            };
        }
        for (slot, v) in [
            (&mut contention.difs, c.difs),
            (&mut contention.sifs, c.sifs),
            (&mut contention.rts, c.rts),
            (&mut contention.cts, c.cts),
            (&mut contention.ack, c.ack),
            (&mut contention.pd, c.pd),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }

        let pu = PuModel {
            tau_id_bar: self.pu.tau_id_bar,
            tau_ac_bar: self.pu.tau_ac_bar,
            t_eva: self.pu.t_eva,
            p_pu: power("pu.p_pu", self.pu.p_pu, self.pu.p_pu_db, None)?,
        };
        let sic = SicModel {
            zeta: self.sic.zeta,
            xi: self.sic.xi,
        };
        let defaults = SensingConfig::default();
        let sensing = SensingConfig {
            f_s: self.sensing.f_s.unwrap_or(defaults.f_s),
            n0_noise: power(
                "sensing.n0_noise",
                self.sensing.n0_noise,
                self.sensing.n0_noise_db,
                Some(defaults.n0_noise),
            )?,
            pd_target: self.sensing.pd_target.unwrap_or(defaults.pd_target),
        };
        let a = &self.access;
        let p_max = power("access.p_max", a.p_max, a.p_max_db, None)?;
        let p_sen = power("access.p_sen", a.p_sen, a.p_sen_db, Some(0.0))?;
        let access = AccessConfig {
            t_frame: a.t_frame,
            t_s: a.t_s.unwrap_or(a.t_frame),
            p_sen,
            p_dat: p_max,
            p_max,
            mode: a.mode,
        };
        let s = Scenario {
            contention,
            pu,
            sic,
            sensing,
            access,
        };
        s.validate().map_err(ConfigError::from_model)?;
        Ok(s)
    }

    pub fn optimizer_settings(&self) -> Result<OptimizerSettings, ConfigError> {
        let d = OptimizerSettings::default();
        let o = self.optimizer.unwrap_or_default();
        let settings = OptimizerSettings {
            p_sen_floor_db: o.p_sen_floor_db.unwrap_or(d.p_sen_floor_db),
            p_sen_step_db: o.p_sen_step_db.unwrap_or(d.p_sen_step_db),
            refine: o.refine.unwrap_or(d.refine),
            coarse_points: o.coarse_points.unwrap_or(d.coarse_points),
            ts_rel_tol: o.ts_rel_tol.unwrap_or(d.ts_rel_tol),
            execution: d.execution,
        };
        settings.validate().map_err(ConfigError::from_model)?;
        Ok(settings)
    }

    pub fn simulation_config(&self) -> Result<SimConfig, ConfigError> {
        let s = self.simulation.unwrap_or_default();
        let mut sim = SimConfig::new(s.cycles.unwrap_or(DEFAULT_CYCLES), self.seed());
        if let Some(p) = s.multi_transition_policy {
            sim.multi_transition_policy = p;
        }
        if let Some(c) = s.pu_clock {
            sim.pu_clock = c;
        }
        sim.validate().map_err(ConfigError::from_model)?;
        Ok(sim)
    }

    /// Resolves defaults, expands the axes and validates every sweep point.
    pub fn plan(&self) -> Result<Plan, ConfigError> {
        let base = self.scenario()?;
        let axes = self
            .sweeps
            .iter()
            .enumerate()
            .map(|(i, a)| a.expand(i))
            .collect::<Result<Vec<_>, _>>()?;
        let probes = self.verify.and_then(|v| v.probes).unwrap_or(DEFAULT_PROBES);
        if probes < 3 {
            return Err(ConfigError::new("verify.probes", "at least 3 probes are needed"));
        }
        let plan = Plan {
            base,
            axes,
            optimizer: self.optimizer_settings()?,
            simulation: self.simulation_config()?,
            probes,
        };
        for k in 0..plan.len() {
            let s = plan.scenario_at(k);
            s.validate().map_err(|e| {
                let mut err = ConfigError::from_model(e);
                err.message = format!("at sweep point {k} ({}): {}", plan.describe(k), err.message);
                err
            })?;
        }
        Ok(plan)
    }
}

impl Plan {
    /// Number of points in the Cartesian product of the axes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of point `k`. The last axis varies fastest.
    pub fn coordinates(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (i, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[i] = axis.values[k % n];
            k /= n;
        }
        out
    }

    pub fn scenario_at(&self, k: usize) -> Scenario {
        let mut s = self.base;
        for (axis, v) in self.axes.iter().zip(self.coordinates(k)) {
            axis.variable.apply(&mut s, v);
        }
        s
    }

    pub fn describe(&self, k: usize) -> String {
        self.axes
            .iter()
            .zip(self.coordinates(k))
            .map(|(a, v)| format!("{} = {v}", a.variable))
            .collect::<Vec<_>>()
            .join(", ")
    }
}
