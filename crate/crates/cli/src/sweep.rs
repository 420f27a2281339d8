use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use fdcmac::{db_to_linear, Scenario};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One `[[sweep]]` table: either explicit `values`, or `start`/`stop` with
/// `points` (linear or log spacing) or `step` (linear only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

/// A sweepable scenario field. Values of `_db` variables are converted to
/// linear power before they are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variable {
    field: Field,
    db: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    N0,
    P,
    TauId,
    TauAc,
    TEva,
    PPu,
    Zeta,
    Xi,
    FS,
    PdTarget,
    TFrame,
    TS,
    PSen,
    PMax,
}

const FIELDS: [(&str, Field, bool); 14] = [
    ("contention.n0", Field::N0, false),
    ("contention.p", Field::P, false),
    ("pu.tau_id_bar", Field::TauId, false),
    ("pu.tau_ac_bar", Field::TauAc, false),
    ("pu.t_eva", Field::TEva, false),
    ("pu.p_pu", Field::PPu, true),
    ("sic.zeta", Field::Zeta, false),
    ("sic.xi", Field::Xi, false),
    ("sensing.f_s", Field::FS, false),
    ("sensing.pd_target", Field::PdTarget, false),
    ("access.t_frame", Field::TFrame, false),
    ("access.t_s", Field::TS, false),
    ("access.p_sen", Field::PSen, true),
    ("access.p_max", Field::PMax, true),
];

impl Variable {
    pub fn names() -> Vec<String> {
        let mut out = Vec::new();
        for (name, _, power) in FIELDS {
            out.push(name.to_string());
            if power {
                out.push(format!("{name}_db"));
            }
        }
        out
    }

    /// Sets the field on `s`. Changing the power cap also moves the
    /// transmission-stage power and clips the sensing power.
    pub fn apply(&self, s: &mut Scenario, value: f64) {
        let v = if self.db { db_to_linear(value) } else { value };
        match self.field {
            Field::N0 => s.contention.n0 = v as u32,
            Field::P => s.contention.p = v,
            Field::TauId => s.pu.tau_id_bar = v,
            Field::TauAc => s.pu.tau_ac_bar = v,
            Field::TEva => s.pu.t_eva = v,
            Field::PPu => s.pu.p_pu = v,
            Field::Zeta => s.sic.zeta = v,
            Field::Xi => s.sic.xi = v,
            Field::FS => s.sensing.f_s = v,
            Field::PdTarget => s.sensing.pd_target = v,
            Field::TFrame => s.access.t_frame = v,
            Field::TS => s.access.t_s = v,
            Field::PSen => s.access.p_sen = v,
            Field::PMax => s.access = s.access.with_p_max(v),
        }
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, db) = match s.strip_suffix("_db") {
            Some(b) => (b, true),
            None => (s, false),
        };
        FIELDS
            .iter()
            .find(|(name, _, power)| *name == base && (*power || !db))
            .map(|&(_, field, _)| Variable { field, db })
            .ok_or_else(|| format!("unknown sweep variable `{s}`; expected one of {}", Variable::names().join(", ")))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = FIELDS.iter().find(|(_, field, _)| *field == self.field).map(|t| t.0).unwrap_or("?");
        write!(f, "{name}{}", if self.db { "_db" } else { "" })
    }
}

/// An expanded axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub variable: Variable,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn expand(&self, index: usize) -> Result<Axis, ConfigError> {
        let field = |key: &str| format!("sweep[{index}].{key}");
        let err = |key: &str, msg: String| ConfigError::new(&field(key), msg);

        let variable: Variable = self.variable.parse().map_err(|m| err("variable", m))?;
        let ranged = self.start.is_some() || self.stop.is_some() || self.points.is_some() || self.step.is_some();
        let values = match (&self.values, ranged) {
            (Some(_), true) => {
                return Err(err("values", "give either `values` or a `start`/`stop` range, not both".into()));
            }
            (Some(v), false) => {
                if self.spacing.is_some() {
                    return Err(err("spacing", "`spacing` only applies to ranges".into()));
                }
                v.clone()
            }
            (None, _) => self.range(&err)?,
        };
        if values.is_empty() {
            return Err(err("values", "sweep axis is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() && !(variable.field == Field::TauId && **v == f64::INFINITY)) {
            return Err(err("values", format!("non-finite value {bad}")));
        }
        if variable.field == Field::N0 {
            if let Some(bad) = values.iter().find(|v| **v < 1.0 || v.fract() != 0.0 || **v > u32::MAX as f64) {
                return Err(err("values", format!("`contention.n0` takes positive integers, got {bad}")));
            }
        }
        Ok(Axis { variable, values })
    }

    fn range(&self, err: &dyn Fn(&str, String) -> ConfigError) -> Result<Vec<f64>, ConfigError> {
        let start = self.start.ok_or_else(|| err("start", "missing `start` (or give `values`)".into()))?;
        let stop = self.stop.ok_or_else(|| err("stop", "missing `stop`".into()))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(err("start", "range bounds must be finite".into()));
        }
        let spacing = self.spacing.unwrap_or_default();
        match (self.points, self.step) {
            (Some(_), Some(_)) => Err(err("step", "give either `points` or `step`, not both".into())),
            (None, None) => Err(err("points", "missing `points` (or `step`)".into())),
            (Some(n), None) => {
                if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                    return Err(err("start", "log spacing needs positive bounds".into()));
                }
                Ok(match n {
                    0 => Vec::new(),
                    1 => vec![start],
                    _ => (0..n)
                        .map(|i| {
                            let f = i as f64 / (n - 1) as f64;
                            if i == n - 1 {
                                return stop;
                            }
                            match spacing {
                                Spacing::Linear => start + f * (stop - start),
                                Spacing::Log => (start.ln() + f * (stop.ln() - start.ln())).exp(),
                            }
                        })
                        .collect(),
                })
            }
            (None, Some(step)) => {
                if spacing == Spacing::Log {
                    return Err(err("spacing", "`step` only supports linear spacing".into()));
                }
                if step.is_nan() || step <= 0.0 || step.is_infinite() {
                    return Err(err("step", format!("must be positive, got {step}")));
                }
                if stop < start {
                    return Ok(Vec::new());
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..n).map(|i| (start + i as f64 * step).min(stop)).collect())
            }
        }
    }
}
