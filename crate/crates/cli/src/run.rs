use serde::Serialize;
use sha2::{Digest, Sha256};

use fdcmac::montecarlo::{simulate, SimReport};
use fdcmac::optimizer::{compare_baselines, optimize_config, verify_ts_shape, BaselinePoint};
use fdcmac::sensing::CalibrationCache;
use fdcmac::throughput::{evaluate_cached, ThroughputReport};
use fdcmac::{linear_to_db, Scenario};

use crate::error::{CliError, ConfigError};
use crate::manifest::{Analysis, Manifest, Plan};

/// One output row. The column set and order are the same for every analysis;
/// columns that do not apply are left empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Row {
    pub point: usize,
    pub status: String,
    /// `fdc`, `single-stage` or `half-duplex` for comparisons, empty otherwise.
    pub protocol: String,
    pub n0: u32,
    pub p: f64,
    pub tau_id_bar: f64,
    pub tau_ac_bar: f64,
    pub t_eva: f64,
    pub p_pu: f64,
    pub zeta: f64,
    pub xi: f64,
    pub f_s: f64,
    pub pd_target: f64,
    pub t_frame: f64,
    pub t_s: f64,
    pub p_sen: f64,
    pub p_sen_db: f64,
    pub p_max_db: f64,
    pub mode: String,
    pub nt: Option<f64>,
    pub t_ove: Option<f64>,
    pub t_cont_bar: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b31: Option<f64>,
    pub b32: Option<f64>,
    pub b3: Option<f64>,
    pub gamma_s1: Option<f64>,
    pub gamma_s2: Option<f64>,
    pub gamma_d1: Option<f64>,
    pub gamma_d2: Option<f64>,
    pub pf00: Option<f64>,
    pub epsilon_star: Option<f64>,
    pub pd_avg: Option<f64>,
    pub k_e: Option<f64>,
    pub delta_tau_inv: Option<f64>,
    pub p_case1: Option<f64>,
    pub p_case2: Option<f64>,
    pub p_case3: Option<f64>,
    pub boundary: Option<bool>,
    pub flagged: Option<bool>,
    pub grid_failures: Option<usize>,
    pub sim_cycles: Option<u64>,
    pub sim_seed: Option<u64>,
    pub sim_nt: Option<f64>,
    pub sim_nt_se: Option<f64>,
    pub sim_case1_bits: Option<f64>,
    pub sim_case2_bits: Option<f64>,
    pub sim_case3_bits: Option<f64>,
    pub sim_multi_transition_fraction: Option<f64>,
    pub p_sen_critical_db: Option<f64>,
    pub left_derivative: Option<f64>,
    pub right_derivative: Option<f64>,
    pub concavity_violations: Option<usize>,
    pub max_second_derivative: Option<f64>,
    pub error: String,
}

fn db(x: f64) -> f64 {
    linear_to_db(x).unwrap_or(f64::NEG_INFINITY)
}

impl Row {
    fn new(point: usize, protocol: &str, s: &Scenario) -> Self {
        Row {
            point,
            status: "ok".into(),
            protocol: protocol.into(),
            n0: s.contention.n0,
            p: s.contention.p,
            tau_id_bar: s.pu.tau_id_bar,
            tau_ac_bar: s.pu.tau_ac_bar,
            t_eva: s.pu.t_eva,
            p_pu: s.pu.p_pu,
            zeta: s.sic.zeta,
            xi: s.sic.xi,
            f_s: s.sensing.f_s,
            pd_target: s.sensing.pd_target,
            t_frame: s.access.t_frame,
            t_s: s.access.t_s,
            p_sen: s.access.p_sen,
            p_sen_db: db(s.access.p_sen),
            p_max_db: db(s.access.p_max),
            mode: s.access.mode.to_string(),
            ..Default::default()
        }
    }

    fn failed(mut self, e: impl std::fmt::Display) -> Self {
        self.status = "failed".into();
        self.error = e.to_string();
        self
    }

    fn with_report(mut self, r: &ThroughputReport) -> Self {
        self.nt = Some(r.nt);
        self.t_ove = Some(r.t_ove);
        self.t_cont_bar = Some(r.t_cont_bar);
        self.b1 = Some(r.b1);
        self.b2 = Some(r.b2);
        self.b31 = Some(r.b31);
        self.b32 = Some(r.b32);
        self.b3 = Some(r.b3);
        self.gamma_s1 = Some(r.rates.gamma_s1);
        self.gamma_s2 = Some(r.rates.gamma_s2);
        self.gamma_d1 = Some(r.rates.gamma_d1);
        self.gamma_d2 = Some(r.rates.gamma_d2);
        self.pf00 = Some(r.pf00);
        self.epsilon_star = Some(r.epsilon_star);
        self.pd_avg = Some(r.pd_avg);
        self.k_e = Some(r.k_e);
        self.delta_tau_inv = Some(r.delta_tau_inv);
        self.p_case1 = Some(r.case_probabilities[0]);
        self.p_case2 = Some(r.case_probabilities[1]);
        self.p_case3 = Some(r.case_probabilities[2]);
        self
    }

    fn with_simulation(mut self, r: &SimReport) -> Self {
        self.sim_cycles = Some(r.cycles);
        self.sim_seed = Some(r.seed);
        self.sim_nt = Some(r.nt_estimate);
        self.sim_nt_se = Some(r.nt_std_error);
        self.sim_case1_bits = Some(r.cases[0].bits_per_cycle);
        self.sim_case2_bits = Some(r.cases[1].bits_per_cycle);
        self.sim_case3_bits = Some(r.cases[2].bits_per_cycle);
        self.sim_multi_transition_fraction = Some(r.multi_transition_fraction);
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub point: usize,
    pub protocol: String,
    pub t_s: f64,
    pub p_sen: f64,
    pub p_sen_db: f64,
    pub p_max_db: f64,
    pub mode: String,
    pub nt: f64,
}

/// Audit record of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub analysis: Analysis,
    pub manifest_sha256: String,
    pub seed: u64,
    pub points: usize,
    pub rows: usize,
    pub failed_rows: usize,
    /// Highest-throughput successful row.
    pub optimum: Option<Optimum>,
}

/// A parsed and validated manifest together with its source hash.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub manifest: Manifest,
    pub plan: Plan,
    pub sha256: String,
    source: String,
}

/// Command-line overrides applied on top of the manifest.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cycles: Option<u64>,
}

pub struct RunOutput {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Experiment {
    pub fn from_source(source: &str) -> Result<Self, ConfigError> {
        let manifest = Manifest::from_toml(source)?;
        let plan = manifest.plan().map_err(|e| e.locate(source))?;
        Ok(Self {
            manifest,
            plan,
            sha256: hex::encode(Sha256::digest(source.as_bytes())),
            source: source.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Runs `analysis` on every sweep point, or on the base scenario only when
    /// `sweep` is false. Rows come back in sweep order.
    pub fn run(&self, analysis: Analysis, sweep: bool, overrides: Overrides) -> Result<RunOutput, CliError> {
        let mut sim = self.plan.simulation;
        let seed = overrides.seed.unwrap_or(self.manifest.seed());
        sim.seed = seed;
        if let Some(c) = overrides.cycles {
            sim.cycles = c;
        }
        sim.validate()
            .map_err(|e| ConfigError::from_model(e).locate(&self.source))?;

        let points: Vec<Scenario> = if sweep {
            (0..self.plan.len()).map(|k| self.plan.scenario_at(k)).collect()
        } else {
            vec![self.plan.base]
        };
        let cache = CalibrationCache::new();
        let settings = self.plan.optimizer;
        let probes = self.plan.probes;
        let per_point = settings.execution.map_range(points.len(), |k| {
            let s = &points[k];
            match analysis {
                Analysis::Eval => vec![eval_row(k, "", s, &cache)],
                Analysis::Simulate => {
                    let row = eval_row(k, "", s, &cache);
                    if !row.is_ok() {
                        return vec![row];
                    }
                    vec![match simulate(s, &sim) {
                        Ok(r) => row.with_simulation(&r),
                        Err(e) => row.failed(e),
                    }]
                }
                Analysis::Optimize => vec![match optimize_config(s, &settings) {
                    Ok(o) => {
                        let best = s.with_t_s(o.t_s_star).with_p_sen(o.p_sen_star);
                        let mut row = eval_row(k, "", &best, &cache);
                        row.boundary = Some(o.boundary_flag);
                        row.flagged = Some(!o.flags.is_empty());
                        row.grid_failures = Some(o.failures.len());
                        row
                    }
                    Err(e) => Row::new(k, "", s).failed(e),
                }],
                Analysis::Compare => match compare_baselines(s, &settings) {
                    Ok(c) => [("fdc", c.fdc), ("single-stage", c.single_stage), ("half-duplex", c.half_duplex)]
                        .into_iter()
                        .map(|(name, b)| eval_row(k, name, &baseline_scenario(s, &b), &cache))
                        .collect(),
                    Err(e) => vec![Row::new(k, "fdc", s).failed(e)],
                },
                Analysis::Verify => {
                    let row = eval_row(k, "", s, &cache);
                    vec![match verify_ts_shape(s, s.access.p_sen, probes, fdcmac::Execution::Sequential) {
                        Ok(d) => Row {
                            p_sen_critical_db: Some(db(d.p_sen_critical)),
                            left_derivative: Some(d.left_derivative),
                            right_derivative: Some(d.right_derivative),
                            concavity_violations: Some(d.concavity_violations),
                            max_second_derivative: Some(d.max_second_derivative),
                            ..row
                        },
                        Err(e) => row.failed(e),
                    }]
                }
            }
        });
        let rows: Vec<Row> = per_point.into_iter().flatten().collect();

        let failed_rows = rows.iter().filter(|r| !r.is_ok()).count();
        let optimum = rows
            .iter()
            .filter(|r| r.is_ok())
            .filter_map(|r| r.nt.map(|nt| (r, nt)))
            .fold(None::<(&Row, f64)>, |best, (r, nt)| match best {
                Some((_, b)) if b >= nt => best,
                _ => Some((r, nt)),
            })
            .map(|(r, nt)| Optimum {
                point: r.point,
                protocol: r.protocol.clone(),
                t_s: r.t_s,
                p_sen: r.p_sen,
                p_sen_db: r.p_sen_db,
                p_max_db: r.p_max_db,
                mode: r.mode.clone(),
                nt,
            });
        let summary = Summary {
            name: self.manifest.name.clone(),
            analysis,
            manifest_sha256: self.sha256.clone(),
            seed,
            points: points.len(),
            rows: rows.len(),
            failed_rows,
            optimum,
        };
        if !rows.is_empty() && failed_rows == rows.len() {
            return Err(CliError::Numerical(format!(
                "all {} rows failed; first error: {}",
                rows.len(),
                rows[0].error
            )));
        }
        Ok(RunOutput { rows, summary })
    }
}

fn eval_row(k: usize, protocol: &str, s: &Scenario, cache: &CalibrationCache) -> Row {
    let row = Row::new(k, protocol, s);
    match evaluate_cached(s, cache) {
        Ok(r) => row.with_report(&r),
        Err(e) => row.failed(e),
    }
}

fn baseline_scenario(s: &Scenario, b: &BaselinePoint) -> Scenario {
    let mut out = s.with_t_s(b.t_s).with_p_sen(b.p_sen);
    out.access.mode = b.mode;
    out
}
