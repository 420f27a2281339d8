//! Joint choice of sensing time and sensing power.
//!
//! For a fixed sensing power the throughput is a one-dimensional function of
//! `t_s` on `[t_s_min, T]`. It is maximized by golden-section search inside
//! the best cell of a coarse grid, with the endpoint `T` compared explicitly.
//! The sensing power is then swept over a dB grid with one local refinement.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::model::{db_to_linear, linear_to_db, Scenario, SensingConfig, SicModel, TxMode};
use crate::throughput::evaluate;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Knobs of the line search and the power sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Lowest non-zero sensing power on the sweep grid.
    pub p_sen_floor_db: f64,
    pub p_sen_step_db: f64,
    /// Re-sweep at a tenth of the step around the best grid point.
    pub refine: bool,
    /// Points of the coarse `t_s` grid used to bracket the maximum.
    pub coarse_points: usize,
    /// Final bracket width of the golden-section search, relative to `T`.
    pub ts_rel_tol: f64,
    pub execution: Execution,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            p_sen_floor_db: -10.0,
            p_sen_step_db: 0.25,
            refine: true,
            coarse_points: 16,
            ts_rel_tol: 1e-4,
            execution: Execution::Parallel,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_sen_step_db > 0.0) {
            return Err(invalid("optimizer.p_sen_step_db", format!("must be > 0, got {}", self.p_sen_step_db)));
        }
        if !self.p_sen_floor_db.is_finite() {
            return Err(invalid("optimizer.p_sen_floor_db", "must be finite"));
        }
        if self.coarse_points < 3 {
            return Err(invalid("optimizer.coarse_points", "at least 3 points are needed to bracket"));
        }
        if !(self.ts_rel_tol > 0.0 && self.ts_rel_tol < 0.5) {
            return Err(invalid("optimizer.ts_rel_tol", format!("must lie in (0, 0.5), got {}", self.ts_rel_tol)));
        }
        Ok(())
    }
}

/// Smallest sensing time searched: ten detector samples, and at least 1 us.
pub fn t_s_min(sc: &SensingConfig) -> f64 {
    (10.0 / sc.f_s).max(1e-6)
}

/// Sensing power at which the boundary derivative of the throughput in `t_s` changes sign.
pub fn critical_sensing_power(p_dat: f64, sc: &SensingConfig, sic: &SicModel) -> f64 {
    let n0 = sc.n0_noise;
    let g = 1.0 + p_dat / (n0 + sic.interference(p_dat));
    n0 * (g * g - 1.0)
}

/// Line-search result for one sensing power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsOptimum {
    pub t_s: f64,
    pub nt: f64,
    /// The maximum sits at `t_s = T`.
    pub boundary: bool,
    /// The coarse profile was not unimodal and a dense scan was used instead.
    pub flagged: bool,
}

fn nt_at(s: &Scenario, t_s: f64) -> Result<f64> {
    Ok(evaluate(&s.with_t_s(t_s))?.nt)
}

/// Number of sign changes in the discrete differences of `ys`, ignoring flat steps.
pub fn slope_sign_changes(ys: &[f64]) -> usize {
    let signs: Vec<f64> = ys
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Maximizes the throughput over `t_s ∈ [t_s_min, T]` at the scenario's sensing power.
pub fn optimize_ts(s: &Scenario, settings: &OptimizerSettings) -> Result<TsOptimum> {
    settings.validate()?;
    let t = s.access.t_frame;
    let lo = t_s_min(&s.sensing).min(t);
    let grid = linspace(lo, t, settings.coarse_points);
    let values = grid.iter().map(|&x| nt_at(s, x)).collect::<Result<Vec<_>>>()?;

    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .fold(0, |best, (i, &y)| if y > v[best] { i } else { best })
    };

    // A profile with one interior peak falls then rises at most once.
    if slope_sign_changes(&values) > 1 {
        let dense = linspace(lo, t, 2000);
        let dv = dense.iter().map(|&x| nt_at(s, x)).collect::<Result<Vec<_>>>()?;
        let k = argmax(&dv);
        return Ok(TsOptimum {
            t_s: dense[k],
            nt: dv[k],
            boundary: k + 1 == dense.len(),
            flagged: true,
        });
    }

    let k = argmax(&values);
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let tol = settings.ts_rel_tol * t;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = nt_at(s, c)?;
    let mut fd = nt_at(s, d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = nt_at(s, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = nt_at(s, d)?;
        }
    }
    let (mut t_best, mut nt_best) = if fc >= fd { (c, fc) } else { (d, fd) };
    for (x, y) in [(grid[k], values[k]), (t, values[values.len() - 1]), (lo, values[0])] {
        if y > nt_best {
            t_best = x;
            nt_best = y;
        }
    }
    Ok(TsOptimum {
        t_s: t_best,
        nt: nt_best,
        boundary: t_best == t,
        flagged: false,
    })
}

/// One sensing power of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub p_sen: f64,
    pub t_s_opt: f64,
    pub nt: f64,
    pub boundary: bool,
    pub flagged: bool,
}

/// A sensing power whose line search failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub p_sen: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub t_s_star: f64,
    pub p_sen_star: f64,
    pub nt_star: f64,
    /// `t_s_star == T`.
    pub boundary_flag: bool,
    /// Sorted by sensing power.
    pub trace: Vec<TracePoint>,
    pub failures: Vec<GridFailure>,
    /// Sensing powers whose `t_s` profile needed the dense fallback.
    pub flags: Vec<f64>,
}

/// Sweep grid of sensing powers: zero, then `floor_db..=p_max_db` in steps.
pub fn p_sen_grid(p_max: f64, settings: &OptimizerSettings) -> Vec<f64> {
    let mut grid = vec![0.0];
    if p_max <= 0.0 {
        return grid;
    }
    let top = 10.0 * p_max.log10();
    let n = ((top - settings.p_sen_floor_db) / settings.p_sen_step_db + 1e-9).floor();
    if n >= 0.0 {
        for i in 0..=(n as usize) {
            grid.push(db_to_linear(settings.p_sen_floor_db + i as f64 * settings.p_sen_step_db).min(p_max));
        }
    }
    if grid.last().is_some_and(|&g| (g - p_max).abs() > 1e-12 * p_max) {
        grid.push(p_max);
    }
    grid
}

fn sweep(
    s: &Scenario,
    powers: &[f64],
    settings: &OptimizerSettings,
) -> (Vec<TracePoint>, Vec<GridFailure>) {
    let results = settings
        .execution
        .map(powers, |&p| optimize_ts(&s.with_p_sen(p), settings));
    let mut trace = Vec::new();
    let mut failures = Vec::new();
    for (&p_sen, r) in powers.iter().zip(results) {
        match r {
            Ok(o) => trace.push(TracePoint {
                p_sen,
                t_s_opt: o.t_s,
                nt: o.nt,
                boundary: o.boundary,
                flagged: o.flagged,
            }),
            Err(e) => failures.push(GridFailure {
                p_sen,
                error: e.to_string(),
            }),
        }
    }
    (trace, failures)
}

/// Maximizes the throughput jointly over sensing time and sensing power.
pub fn optimize_config(s: &Scenario, settings: &OptimizerSettings) -> Result<OptimizationResult> {
    s.validate()?;
    settings.validate()?;
    let p_max = s.access.p_max;
    let grid = p_sen_grid(p_max, settings);
    let (mut trace, mut failures) = sweep(s, &grid, settings);

    let best_index = |tr: &[TracePoint]| {
        tr.iter()
            .enumerate()
            .fold(None, |best: Option<usize>, (i, p)| match best {
                Some(b) if tr[b].nt >= p.nt => Some(b),
                _ => Some(i),
            })
    };

    if settings.refine {
        if let Some(b) = best_index(&trace) {
            let centre = trace[b].p_sen;
            if centre > 0.0 {
                let c_db = linear_to_db(centre)?;
                let fine = settings.p_sen_step_db / 10.0;
                let extra: Vec<f64> = (-9..=9)
                    .filter(|&i| i != 0)
                    .map(|i| c_db + i as f64 * fine)
                    .filter(|&db| db >= settings.p_sen_floor_db - 1e-9)
                    .map(db_to_linear)
                    .filter(|&p| p <= p_max * (1.0 + 1e-12))
                    .map(|p| p.min(p_max))
                    .filter(|p| !trace.iter().any(|t| (t.p_sen - p).abs() <= 1e-12 * p))
                    .collect();
                let (t2, f2) = sweep(s, &extra, settings);
                trace.extend(t2);
                failures.extend(f2);
                trace.sort_by(|a, b| a.p_sen.total_cmp(&b.p_sen));
                failures.sort_by(|a, b| a.p_sen.total_cmp(&b.p_sen));
            }
        }
    }

    let Some(b) = best_index(&trace) else {
        return Err(crate::error::Error::Numerical {
            what: "optimize_config (every grid point failed)",
            residual: f64::NAN,
        });
    };
    let best = trace[b];
    let flags = trace.iter().filter(|p| p.flagged).map(|p| p.p_sen).collect();
    Ok(OptimizationResult {
        t_s_star: best.t_s_opt,
        p_sen_star: best.p_sen,
        nt_star: best.nt,
        boundary_flag: best.boundary,
        trace,
        failures,
        flags,
    })
}

/// Optimum for each transmission probability `p`, all else fixed.
pub fn sweep_transmission_probability(
    s: &Scenario,
    ps: &[f64],
    settings: &OptimizerSettings,
) -> Vec<(f64, Result<OptimizationResult>)> {
    let inner = OptimizerSettings {
        execution: Execution::Sequential,
        ..*settings
    };
    let results = settings.execution.map(ps, |&p| {
        let mut sc = *s;
        sc.contention.p = p;
        optimize_config(&sc, &inner)
    });
    ps.iter().copied().zip(results).collect()
}

/// A protocol variant evaluated at its own best configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub t_s: f64,
    pub p_sen: f64,
    pub nt: f64,
    pub mode: TxMode,
}

/// The two-stage protocol against its two special cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub p_max: f64,
    pub fdc: BaselinePoint,
    /// Sensing for the whole frame, sensing power swept up to the cap.
    pub single_stage: BaselinePoint,
    /// Silent sensing followed by one-way transmission at the cap.
    pub half_duplex: BaselinePoint,
}

/// Optimizes the full protocol, the single-stage variant (`t_s = T`) and the
/// half-duplex variant (`p_sen = 0`, one-way transmission) on the same scenario.
pub fn compare_baselines(s: &Scenario, settings: &OptimizerSettings) -> Result<BaselineComparison> {
    let fdc = optimize_config(s, settings)?;

    let t = s.access.t_frame;
    let grid = p_sen_grid(s.access.p_max, settings);
    let full = s.with_t_s(t);
    let single = settings
        .execution
        .map(&grid, |&p| evaluate(&full.with_p_sen(p)).map(|r| (p, r.nt)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best });

    let mut hd = s.with_p_sen(0.0);
    hd.access.mode = TxMode::Hdtx;
    let hd_opt = optimize_ts(&hd, settings)?;

    Ok(BaselineComparison {
        p_max: s.access.p_max,
        fdc: BaselinePoint {
            t_s: fdc.t_s_star,
            p_sen: fdc.p_sen_star,
            nt: fdc.nt_star,
            mode: s.access.mode,
        },
        single_stage: BaselinePoint {
            t_s: t,
            p_sen: single.0,
            nt: single.1,
            mode: s.access.mode,
        },
        half_duplex: BaselinePoint {
            t_s: hd_opt.t_s,
            p_sen: 0.0,
            nt: hd_opt.nt,
            mode: TxMode::Hdtx,
        },
    })
}

/// Finite-difference checks of the shape of the throughput in `t_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsShapeDiagnostics {
    pub p_sen_critical: f64,
    pub p_sen: f64,
    /// Derivative near `t_s = 0`.
    pub left_derivative: f64,
    /// One-sided derivative at `t_s = T`.
    pub right_derivative: f64,
    pub left_derivative_sign: i8,
    pub right_derivative_sign: i8,
    /// Interior probes whose second derivative is positive beyond its error estimate.
    pub concavity_violations: usize,
    pub probes: usize,
    pub max_second_derivative: f64,
    /// The right-derivative sign is the one predicted by the critical power
    /// (negative for one-way transmission or below the critical power).
    pub boundary_sign_as_predicted: bool,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Derivative and concavity diagnostics of `t_s ↦ NT` at sensing power `p_sen`.
pub fn verify_ts_shape(s: &Scenario, p_sen: f64, probes: usize, execution: Execution) -> Result<TsShapeDiagnostics> {
    let s = s.with_p_sen(p_sen);
    s.validate()?;
    let t = s.access.t_frame;
    let h = 1e-4 * t;
    let f = |x: f64| nt_at(&s, x);

    let lo = t_s_min(&s.sensing).max(h);
    let left_derivative = (f(lo + 2.0 * h)? - f(lo)?) / (2.0 * h);
    let right_derivative = (3.0 * f(t)? - 4.0 * f(t - h)? + f(t - 2.0 * h)?) / (2.0 * h);

    // Interior grid kept one full step away from both ends.
    let a = lo + 2.0 * h;
    let b = t - 2.0 * h;
    let grid = linspace(a, b, probes.max(2));
    let second = execution.map(&grid, |&x| -> Result<(f64, f64)> {
        let d = |step: f64| -> Result<f64> { Ok((f(x + step)? - 2.0 * f(x)? + f(x - step)?) / (step * step)) };
        let coarse = d(h)?;
        let fine = d(h / 2.0)?;
        let rich = (4.0 * fine - coarse) / 3.0;
        Ok((rich, (fine - coarse).abs()))
    });
    let mut violations = 0;
    let mut max_second = f64::NEG_INFINITY;
    for r in second {
        let (d2, err) = r?;
        max_second = max_second.max(d2);
        if d2 > err {
            violations += 1;
        }
    }

    let p_crit = critical_sensing_power(s.access.p_dat, &s.sensing, &s.sic);
    let expected_right = match s.access.mode {
        TxMode::Hdtx => -1,
        TxMode::Fdtx if p_sen > p_crit => 1,
        TxMode::Fdtx => -1,
    };
    Ok(TsShapeDiagnostics {
        p_sen_critical: p_crit,
        p_sen,
        left_derivative,
        right_derivative,
        left_derivative_sign: sign(left_derivative),
        right_derivative_sign: sign(right_derivative),
        concavity_violations: violations,
        probes: grid.len(),
        max_second_derivative: max_second,
        boundary_sign_as_predicted: sign(right_derivative) == expected_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccessConfig, ContentionParams, PuModel};
    use approx::assert_abs_diff_eq;

    fn scenario(zeta: f64, xi: f64, mode: TxMode, p_sen_db: f64) -> Scenario {
        Scenario {
            contention: ContentionParams::standard(40, 0.0022),
            pu: PuModel {
                tau_id_bar: 0.15,
                tau_ac_bar: 0.05,
                t_eva: 0.1,
                p_pu: db_to_linear(-20.0),
            },
            sic: SicModel { zeta, xi },
            sensing: SensingConfig::default(),
            access: AccessConfig::new(15e-3, 2.44e-3, db_to_linear(p_sen_db), db_to_linear(15.0), mode).unwrap(),
        }
    }

    #[test]
    fn critical_power_values() {
        let sc = SensingConfig::default();
        let p = db_to_linear(15.0);
        let low = critical_sensing_power(p, &sc, &SicModel { zeta: 0.7, xi: 1.0 });
        let high = critical_sensing_power(p, &sc, &SicModel { zeta: 0.08, xi: 1.0 });
        assert_abs_diff_eq!(linear_to_db(low).unwrap(), 6.6294, epsilon = 1e-3);
        assert_abs_diff_eq!(linear_to_db(high).unwrap(), 19.9201, epsilon = 1e-3);
        let none = critical_sensing_power(p, &sc, &SicModel { zeta: 0.0, xi: 1.0 });
        assert_abs_diff_eq!(none, (1.0 + p).powi(2) - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sign_changes() {
        assert_eq!(slope_sign_changes(&[1.0, 2.0, 3.0, 2.0]), 1);
        assert_eq!(slope_sign_changes(&[1.0, 2.0, 2.0, 3.0]), 0);
        assert_eq!(slope_sign_changes(&[1.0, 2.0, 1.0, 2.0]), 2);
    }

    #[test]
    fn power_grid_shape() {
        let st = OptimizerSettings::default();
        let g = p_sen_grid(db_to_linear(15.0), &st);
        assert_eq!(g[0], 0.0);
        assert_eq!(g.len(), 1 + 101);
        assert_abs_diff_eq!(*g.last().unwrap(), db_to_linear(15.0), epsilon = 1e-12);
        assert_eq!(p_sen_grid(0.0, &st), vec![0.0]);
        assert_eq!(p_sen_grid(db_to_linear(-20.0), &st), vec![0.0, db_to_linear(-20.0)]);
    }

    #[test]
    fn line_search_agrees_with_dense_scan() {
        let st = OptimizerSettings::default();
        for s in [scenario(0.08, 0.95, TxMode::Fdtx, 4.6552), scenario(0.08, 0.95, TxMode::Hdtx, 5.6897)] {
            let opt = optimize_ts(&s, &st).unwrap();
            let t = s.access.t_frame;
            let lo = t_s_min(&s.sensing);
            let dense = linspace(lo, t, 2000);
            let step = dense[1] - dense[0];
            let (t_grid, nt_grid) = dense
                .iter()
                .map(|&x| (x, nt_at(&s, x).unwrap()))
                .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
            assert!((opt.t_s - t_grid).abs() <= step, "{} vs {}", opt.t_s, t_grid);
            assert!(opt.nt >= nt_grid - 1e-9);
            assert!(!opt.flagged);
        }
    }

    #[test]
    fn strong_sensing_power_pins_full_duplex_to_boundary() {
        let s = scenario(0.7, 1.0, TxMode::Fdtx, 10.0);
        let opt = optimize_ts(&s, &OptimizerSettings::default()).unwrap();
        assert!(opt.boundary);
        assert_eq!(opt.t_s, 15e-3);
    }

    #[test]
    fn vanishing_power_cap_degenerates_to_half_duplex_sensing() {
        let mut s = scenario(0.08, 0.95, TxMode::Hdtx, 0.0);
        s.access = s.access.with_p_max(0.0).with_p_sen(0.0);
        let r = optimize_config(&s, &OptimizerSettings::default()).unwrap();
        assert_eq!(r.p_sen_star, 0.0);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn serial_and_parallel_sweeps_are_identical() {
        let s = scenario(0.08, 0.95, TxMode::Fdtx, 4.6552);
        let coarse = OptimizerSettings {
            p_sen_step_db: 2.0,
            ..OptimizerSettings::default()
        };
        let a = optimize_config(&s, &OptimizerSettings { execution: Execution::Sequential, ..coarse }).unwrap();
        let b = optimize_config(&s, &OptimizerSettings { execution: Execution::Parallel, ..coarse }).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.iter().all(|p| p.nt <= a.nt_star));
        assert!(a.trace.windows(2).all(|w| w[0].p_sen < w[1].p_sen));
    }

    #[test]
    fn baselines_coincide_without_self_interference_at_full_window() {
        // With t_s pinned to T by a dominant sensing stage, the two-stage and
        // single-stage protocols are the same configuration.
        let s = scenario(0.8, 0.95, TxMode::Fdtx, 15.0);
        let st = OptimizerSettings {
            p_sen_step_db: 1.0,
            ..OptimizerSettings::default()
        };
        let c = compare_baselines(&s, &st).unwrap();
        assert!(c.fdc.nt >= c.single_stage.nt);
        if c.fdc.t_s == s.access.t_frame && c.fdc.p_sen == c.single_stage.p_sen {
            assert_eq!(c.fdc.nt, c.single_stage.nt);
        }
        assert_eq!(c.half_duplex.p_sen, 0.0);
    }

    #[test]
    fn half_duplex_right_derivative_is_reported() {
        let s = scenario(0.08, 0.95, TxMode::Hdtx, 5.6897);
        let d = verify_ts_shape(&s, db_to_linear(5.6897), 20, Execution::Parallel).unwrap();
        assert_eq!(d.left_derivative_sign, 1);
        assert_eq!(d.probes, 20);
        assert!(d.right_derivative.is_finite());
    }
}
