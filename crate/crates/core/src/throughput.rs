//! Expected bits per cycle and normalized throughput.
//!
//! A cycle is one reservation phase followed by a data phase of length `T`.
//! Only cycles that start with the channel idle carry bits, split by when the
//! PU returns:
//!
//! * case 1: not before the end of the frame,
//! * case 2: during the transmission stage `(t_s, T)`,
//! * case 3: during the sensing stage `[0, t_s]`.
//!
//! The case-2 and case-3 closed forms contain `Δτ (e^{x} - 1)` and
//! `Δτ² (x e^x - e^x + 1)` with `x ∝ 1/Δτ`, which cancel catastrophically as
//! the idle and active means approach each other. They are evaluated through
//! [`exprel`] and [`h2`], which are algebraically identical and stay accurate
//! for every `1/Δτ`, including zero.

use serde::{Deserialize, Serialize};

use crate::contention::contention_overhead;
use crate::error::{Error, Result};
use crate::model::{AccessConfig, ContentionParams, PuModel, Scenario, SensingConfig, SicModel};
use crate::sensing::{self, CalibrationCache, SensingOutcomeModel};

/// Per-stage SNRs and mode weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateContext {
    pub gamma_s1: f64,
    pub gamma_s2: f64,
    pub gamma_d1: f64,
    pub gamma_d2: f64,
    pub theta: f64,
    pub phi: f64,
}

impl RateContext {
    pub fn new(cfg: &AccessConfig, pu: &PuModel, sc: &SensingConfig, sic: &SicModel) -> Self {
        let n0 = sc.n0_noise;
        let theta = cfg.mode.theta();
        let si = theta * sic.interference(cfg.p_dat);
        Self {
            gamma_s1: cfg.p_sen / n0,
            gamma_s2: cfg.p_sen / (n0 + pu.p_pu),
            gamma_d1: cfg.p_dat / (n0 + si),
            gamma_d2: cfg.p_dat / (n0 + pu.p_pu + si),
            theta,
            phi: cfg.mode.phi(),
        }
    }

    fn l_s1(&self) -> f64 {
        self.gamma_s1.ln_1p() / std::f64::consts::LN_2
    }

    fn l_s2(&self) -> f64 {
        self.gamma_s2.ln_1p() / std::f64::consts::LN_2
    }

    fn l_d1(&self) -> f64 {
        self.gamma_d1.ln_1p() / std::f64::consts::LN_2
    }

    fn l_d2(&self) -> f64 {
        self.gamma_d2.ln_1p() / std::f64::consts::LN_2
    }
}

/// `(e^x - 1) / x`, equal to 1 at zero.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// `(x e^x - e^x + 1) / x² = Σ_k x^k (k+1)/(k+2)!`, equal to 1/2 at zero.
pub fn h2(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let mut term = 0.5; // x^0 * 1/2!
        let mut sum = 0.0;
        for k in 0..24 {
            sum += term;
            let k = k as f64;
            // term_{k+1} / term_k = x (k+2) / ((k+1)(k+3))
            term *= x * (k + 2.0) / ((k + 1.0) * (k + 3.0));
        }
        sum
    } else {
        (x * x.exp() - x.exp_m1()) / (x * x)
    }
}

/// Bits delivered when the PU stays away for the whole frame.
pub fn bits_case1(cfg: &AccessConfig, ctx: &RateContext, pf00: f64, k_e: f64, delta_tau_inv: f64) -> f64 {
    let (t, ts) = (cfg.t_frame, cfg.t_s);
    k_e * (t * delta_tau_inv).exp() * (ts * ctx.l_s1() + ctx.phi * (1.0 - pf00) * (t - ts) * ctx.l_d1())
}

/// Bits delivered when the PU returns during the transmission stage.
pub fn bits_case2(
    cfg: &AccessConfig,
    ctx: &RateContext,
    pf00: f64,
    k_e: f64,
    delta_tau_inv: f64,
    pu: &PuModel,
) -> f64 {
    let (t, ts) = (cfg.t_frame, cfg.t_s);
    let d = t - ts;
    let r = delta_tau_inv;
    let grow = (ts * r).exp();
    let a = d * grow * exprel(d * r);
    let tx = ctx.phi * (1.0 - pf00);
    let l_ratio = ctx.l_d1() - ctx.l_d2();
    k_e / pu.tau_id_bar * (a * (ts * ctx.l_s1() + tx * d * ctx.l_d2()) + tx * l_ratio * d * d * grow * h2(d * r))
}

/// Transmission-stage bits of a frame whose PU arrives during sensing but is missed.
pub fn transmission_bits_after_miss(cfg: &AccessConfig, ctx: &RateContext) -> f64 {
    ctx.phi * (cfg.t_frame - cfg.t_s) * ctx.l_d2()
}

/// `B₃₁`: case-3 bits as if the arriving PU were never detected.
pub fn bits_case31(cfg: &AccessConfig, ctx: &RateContext, k_e: f64, delta_tau_inv: f64, pu: &PuModel) -> f64 {
    let ts = cfg.t_s;
    let x = ts * delta_tau_inv;
    let td11 = transmission_bits_after_miss(cfg, ctx);
    k_e / pu.tau_id_bar * (ts * ts * h2(x) * (ctx.l_s1() - ctx.l_s2()) + ts * exprel(x) * (td11 + ts * ctx.l_s2()))
}

/// `T̄₃₂ = ∫_0^{t_s} P_d01(t) f_id(t) e^{t/τ_ac} dt`.
pub fn t32_integral(eps: f64, cfg: &AccessConfig, pu: &PuModel, sc: &SensingConfig, sic: &SicModel) -> Result<f64> {
    let ts = cfg.t_s;
    let r = 1.0 / pu.tau_ac_bar - 1.0 / pu.tau_id_bar;
    let scale = ts / pu.tau_id_bar;
    sensing::integrate_detection(eps, ts, cfg.p_sen, pu, sc, sic, move |u| scale * (u * ts * r).exp())
}

/// `(B₃₁, B₃₂)`. `B₃₂ ≤ 0` removes the transmission-stage bits of frames whose
/// PU was detected.
#[allow(clippy::too_many_arguments)]
pub fn bits_case3(
    cfg: &AccessConfig,
    ctx: &RateContext,
    sensing: &SensingOutcomeModel,
    k_e: f64,
    delta_tau_inv: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<(f64, f64)> {
    let b31 = bits_case31(cfg, ctx, k_e, delta_tau_inv, pu);
    let td11 = transmission_bits_after_miss(cfg, ctx);
    let t32 = t32_integral(sensing.epsilon_star, cfg, pu, sc, sic)?;
    let b32 = -k_e * td11 * t32;

    // The detection probability is averaged against f_id and e^{t/τ_ac} ∈ [1, e^{t_s/τ_ac}].
    let base = k_e * td11 * sensing.pd_avg * -(-cfg.t_s / pu.tau_id_bar).exp_m1();
    let upper = base * (cfg.t_s / pu.tau_ac_bar).exp();
    let slack = 1e-8 * upper.abs() + 1e-14;
    if !(-b32 >= base - slack && -b32 <= upper + slack) {
        return Err(Error::Invariant {
            what: "B32 bounds",
            detail: format!("-B32 = {} outside [{base}, {upper}]", -b32),
        });
    }
    Ok((b31, b32))
}

/// Probabilities of the three bit-carrying cases.
pub fn case_probabilities(cfg: &AccessConfig, k_e: f64, delta_tau_inv: f64, pu: &PuModel) -> [f64; 3] {
    let (t, ts) = (cfg.t_frame, cfg.t_s);
    let r = delta_tau_inv;
    let d = t - ts;
    [
        k_e * (t * r).exp(),
        k_e / pu.tau_id_bar * d * (ts * r).exp() * exprel(d * r),
        k_e / pu.tau_id_bar * ts * exprel(ts * r),
    ]
}

/// Every intermediate of one throughput evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub t_ove: f64,
    pub t_cont_bar: f64,
    pub b1: f64,
    pub b2: f64,
    pub b31: f64,
    pub b32: f64,
    pub b3: f64,
    /// Bits per second per hertz averaged over a cycle.
    pub nt: f64,
    pub rates: RateContext,
    pub pf00: f64,
    pub epsilon_star: f64,
    pub pd_avg: f64,
    pub k_e: f64,
    /// `1/Δτ = 1/τ_ac - 1/τ_id`.
    pub delta_tau_inv: f64,
    pub case_probabilities: [f64; 3],
}

fn clamp_roundoff(what: &'static str, v: f64, b1: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v.abs() < 1e-12 * b1 {
        Ok(0.0)
    } else {
        Err(Error::Invariant {
            what,
            detail: format!("negative expected bits {v} (B1 = {b1})"),
        })
    }
}

/// Normalized throughput of one configuration.
pub fn normalized_throughput(
    cfg: &AccessConfig,
    cp: &ContentionParams,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<ThroughputReport> {
    evaluate_with(cfg, cp, pu, sc, sic, None)
}

/// [`normalized_throughput`] on a bundled scenario.
pub fn evaluate(s: &Scenario) -> Result<ThroughputReport> {
    evaluate_with(&s.access, &s.contention, &s.pu, &s.sensing, &s.sic, None)
}

/// [`evaluate`] with thresholds memoized in `cache`.
pub fn evaluate_cached(s: &Scenario, cache: &CalibrationCache) -> Result<ThroughputReport> {
    evaluate_with(&s.access, &s.contention, &s.pu, &s.sensing, &s.sic, Some(cache))
}

fn evaluate_with(
    cfg: &AccessConfig,
    cp: &ContentionParams,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
    cache: Option<&CalibrationCache>,
) -> Result<ThroughputReport> {
    cfg.validate()?;
    pu.validate()?;
    sc.validate()?;
    sic.validate()?;
    let stats = contention_overhead(cp)?;
    let t_ove = stats.t_ove;
    let t = cfg.t_frame;

    let k_e = pu.p_idle() * (-(t_ove / pu.tau_id_bar + t / pu.tau_ac_bar)).exp();
    let delta_tau_inv = 1.0 / pu.tau_ac_bar - 1.0 / pu.tau_id_bar;
    let ctx = RateContext::new(cfg, pu, sc, sic);

    let eps = match cache {
        Some(c) => c.calibrate(cfg.t_s, cfg.p_sen, sc.pd_target, pu, sc, sic)?,
        None => sensing::calibrate_threshold(cfg.t_s, cfg.p_sen, sc.pd_target, pu, sc, sic)?,
    };
    let outcome = SensingOutcomeModel {
        pf00: sensing::false_alarm_p00(eps, cfg.t_s, cfg.p_sen, sc, sic)?,
        epsilon_star: eps,
        gamma_ps: pu.p_pu / (sc.n0_noise + sic.interference(cfg.p_sen)),
        pd_avg: sc.pd_target,
    };

    let b1 = bits_case1(cfg, &ctx, outcome.pf00, k_e, delta_tau_inv);
    let b2 = clamp_roundoff("B2", bits_case2(cfg, &ctx, outcome.pf00, k_e, delta_tau_inv, pu), b1)?;
    let (b31, b32) = bits_case3(cfg, &ctx, &outcome, k_e, delta_tau_inv, pu, sc, sic)?;
    let b3 = clamp_roundoff("B3", b31 + b32, b1)?;
    let nt = (b1 + b2 + b3) / (t_ove + t);
    if !nt.is_finite() {
        return Err(Error::Numerical {
            what: "normalized throughput",
            residual: nt,
        });
    }

    Ok(ThroughputReport {
        t_ove,
        t_cont_bar: stats.t_cont_bar,
        b1,
        b2,
        b31,
        b32,
        b3,
        nt,
        rates: ctx,
        pf00: outcome.pf00,
        epsilon_star: eps,
        pd_avg: outcome.pd_avg,
        k_e,
        delta_tau_inv,
        case_probabilities: case_probabilities(cfg, k_e, delta_tau_inv, pu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, TxMode};
    use crate::sensing::detection_p01;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn fig5() -> Scenario {
        Scenario {
            contention: ContentionParams::standard(40, 0.0022),
            pu: PuModel {
                tau_id_bar: 0.15,
                tau_ac_bar: 0.05,
                t_eva: 0.1,
                p_pu: db_to_linear(-20.0),
            },
            sic: SicModel { zeta: 0.08, xi: 0.95 },
            sensing: SensingConfig::default(),
            access: AccessConfig::new(15e-3, 2.44e-3, db_to_linear(4.6552), db_to_linear(15.0), TxMode::Fdtx)
                .unwrap(),
        }
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    /// The case-2 and case-3 expectations written as integrals over the PU
    /// arrival time, evaluated by Simpson's rule.
    fn bits_by_integration(s: &Scenario, r: &ThroughputReport) -> (f64, f64) {
        let a = &s.access;
        let log2 = |g: f64| (1.0 + g).log2();
        let c = &r.rates;
        let dens = |t: f64| r.k_e / s.pu.tau_id_bar * (t * r.delta_tau_inv).exp();
        let tx = c.phi * (1.0 - r.pf00);
        let b2 = simpson(
            |t| {
                dens(t)
                    * (a.t_s * log2(c.gamma_s1)
                        + tx * ((t - a.t_s) * log2(c.gamma_d1) + (a.t_frame - t) * log2(c.gamma_d2)))
            },
            a.t_s,
            a.t_frame,
            20_000,
        );
        let td11 = c.phi * (a.t_frame - a.t_s) * log2(c.gamma_d2);
        let b3 = simpson(
            |t| {
                let pd = detection_p01(r.epsilon_star, a.t_s, t, a.p_sen, s.pu.p_pu, &s.sensing, &s.sic).unwrap();
                dens(t) * (t * log2(c.gamma_s1) + (a.t_s - t) * log2(c.gamma_s2) + (1.0 - pd) * td11)
            },
            0.0,
            a.t_s,
            20_000,
        );
        (b2, b3)
    }

    /// The closed forms as printed, with `Δτ` appearing explicitly.
    fn literal_b2_b31(s: &Scenario, r: &ThroughputReport) -> (f64, f64) {
        let a = &s.access;
        let c = &r.rates;
        let dt = 1.0 / r.delta_tau_inv;
        let (t, ts) = (a.t_frame, a.t_s);
        let l = |g: f64| (1.0 + g).log2();
        let b2 = r.k_e * dt / s.pu.tau_id_bar
            * (((t / dt).exp() - (ts / dt).exp())
                * (ts * l(c.gamma_s1) - c.phi * dt * (1.0 - r.pf00) * ((1.0 + c.gamma_d1) / (1.0 + c.gamma_d2)).log2())
                + c.phi * (t - ts) * (1.0 - r.pf00) * ((t / dt).exp() * l(c.gamma_d1) - (ts / dt).exp() * l(c.gamma_d2)));
        let td11 = c.phi * (t - ts) * l(c.gamma_d2);
        let b31 = r.k_e * dt / s.pu.tau_id_bar
            * (dt * ((ts / dt - 1.0) * (ts / dt).exp() + 1.0) * ((1.0 + c.gamma_s1) / (1.0 + c.gamma_s2)).log2()
                + ((ts / dt).exp() - 1.0) * (td11 + ts * l(c.gamma_s2)));
        (b2, b31)
    }

    #[test]
    fn series_helpers() {
        assert_eq!(exprel(0.0), 1.0);
        assert_eq!(h2(0.0), 0.5);
        for &x in &[1e-12f64, 1e-6, 0.01, 0.3, 0.49, 0.51, 2.0, -0.3, -3.0] {
            let direct = if x.abs() > 1e-3 {
                (x * x.exp() - x.exp() + 1.0) / (x * x)
            } else {
                0.5 + x / 3.0 + x * x / 8.0
            };
            assert_relative_eq!(h2(x), direct, max_relative = 1e-10);
            assert_relative_eq!(exprel(x), if x.abs() > 1e-3 { (x.exp() - 1.0) / x } else { 1.0 + x / 2.0 + x * x / 6.0 }, max_relative = 1e-10);
        }
    }

    #[test]
    fn fig5_point_components() {
        let r = evaluate(&fig5()).unwrap();
        assert_relative_eq!(r.t_ove, 1.777_349_084_737_712_4e-3, max_relative = 1e-12);
        assert_relative_eq!(r.b1, 0.023_760_3, max_relative = 1e-5);
        assert_relative_eq!(r.b2, 0.001_830_9, max_relative = 1e-4);
        assert_relative_eq!(r.b31, 0.000_834_72, max_relative = 1e-4);
        assert_relative_eq!(r.b32, -0.000_632_08, max_relative = 1e-4);
        assert_relative_eq!(r.nt, 1.537_420_6, max_relative = 1e-6);
        assert_abs_diff_eq!(r.pf00, 0.649_073, epsilon = 1e-5);
    }

    #[test]
    fn closed_forms_match_integrals() {
        let s = fig5();
        let r = evaluate(&s).unwrap();
        let (b2, b3) = bits_by_integration(&s, &r);
        assert_relative_eq!(r.b2, b2, max_relative = 1e-9);
        assert_relative_eq!(r.b3, b3, max_relative = 1e-8);
        let (lb2, lb31) = literal_b2_b31(&s, &r);
        assert_relative_eq!(r.b2, lb2, max_relative = 1e-10);
        assert_relative_eq!(r.b31, lb31, max_relative = 1e-10);
    }

    #[test]
    fn equal_means_use_the_series_limit() {
        let mut s = fig5();
        s.pu.tau_ac_bar = s.pu.tau_id_bar;
        let r = evaluate(&s).unwrap();
        assert_eq!(r.delta_tau_inv, 0.0);
        let (b2, b3) = bits_by_integration(&s, &r);
        assert_relative_eq!(r.b2, b2, max_relative = 1e-9);
        assert_relative_eq!(r.b3, b3, max_relative = 1e-8);

        // Continuity across the former singularity.
        let mut near = s;
        near.pu.tau_ac_bar = 1.0 / (1.0 / s.pu.tau_id_bar + 2e-9);
        let rn = evaluate(&near).unwrap();
        assert_relative_eq!(rn.nt, r.nt, max_relative = 1e-7);
    }

    #[test]
    fn full_sensing_window_boundary() {
        let s = fig5().with_t_s(15e-3);
        let r = evaluate(&s).unwrap();
        let l_s1 = (1.0 + r.rates.gamma_s1).log2();
        assert_relative_eq!(r.b1, r.k_e * (15e-3 * r.delta_tau_inv).exp() * 15e-3 * l_s1, max_relative = 1e-14);
        assert_eq!(r.b2, 0.0);
        assert_eq!(r.b32, 0.0);
    }

    #[test]
    fn certain_false_alarm_leaves_sensing_bits_only() {
        let s = fig5();
        let ctx = RateContext::new(&s.access, &s.pu, &s.sensing, &s.sic);
        let b = bits_case1(&s.access, &ctx, 1.0, 0.5, 2.0);
        assert_relative_eq!(b, 0.5 * (2.0f64 * 15e-3).exp() * 2.44e-3 * ctx.l_s1(), max_relative = 1e-14);
    }

    #[test]
    fn pu_without_power_kills_ratio_terms() {
        let mut s = fig5();
        s.pu.p_pu = 0.0;
        let r = evaluate(&s).unwrap();
        let c = &r.rates;
        assert_eq!(c.gamma_d1, c.gamma_d2);
        let (t, ts) = (15e-3, 2.44e-3);
        let a = (t - ts) * (ts * r.delta_tau_inv).exp() * exprel((t - ts) * r.delta_tau_inv);
        let hand = r.k_e / s.pu.tau_id_bar * a * (ts * c.l_s1() + c.phi * (1.0 - r.pf00) * (t - ts) * c.l_d1());
        assert_relative_eq!(r.b2, hand, max_relative = 1e-13);
    }

    #[test]
    fn perfect_detection_cancels_transmission_bits() {
        // With tau_ac -> inf and P_d01 = 1 the subtracted term equals the
        // transmission-stage part of B31 exactly.
        let mut s = fig5();
        s.pu.tau_ac_bar = 1e12;
        let cfg = s.access;
        let ctx = RateContext::new(&cfg, &s.pu, &s.sensing, &s.sic);
        let r = 1.0 / s.pu.tau_ac_bar - 1.0 / s.pu.tau_id_bar;
        let k_e = 0.7;
        let td11 = transmission_bits_after_miss(&cfg, &ctx);
        let with_tx = bits_case31(&cfg, &ctx, k_e, r, &s.pu);
        let ts = cfg.t_s;
        // ∫ f_id(t) e^{t/τ_ac} dt over [0, t_s] with P_d01 ≡ 1.
        let t32 = (ts * r).exp_m1() / r / s.pu.tau_id_bar;
        let b32 = -k_e * td11 * t32;
        let mut silent = ctx;
        silent.gamma_d2 = 0.0;
        let without_tx = bits_case31(&cfg, &silent, k_e, r, &s.pu);
        assert_relative_eq!(with_tx + b32, without_tx, max_relative = 1e-9);
    }

    #[test]
    fn vanishing_sensing_time() {
        let tiny = evaluate(&fig5().with_t_s(2e-6)).unwrap();
        let small = evaluate(&fig5().with_t_s(2e-5)).unwrap();
        assert!(tiny.b3 < small.b3 / 5.0);
        assert!(tiny.b3 < 1e-4 * tiny.b1);
    }

    #[test]
    fn hd_baseline_is_finite() {
        let mut s = fig5();
        s.access.mode = TxMode::Hdtx;
        s.access.p_sen = 0.0;
        let r = evaluate(&s).unwrap();
        assert!(r.nt.is_finite() && r.nt > 0.0);
        assert_eq!(r.rates.gamma_s1, 0.0);
    }

    #[test]
    fn case_probabilities_are_a_sub_distribution() {
        let s = fig5();
        let r = evaluate(&s).unwrap();
        let total: f64 = r.case_probabilities.iter().sum();
        // All three cases together: channel idle at cycle start and PU not
        // back before the reservation phase ends.
        let idle_through_reservation = s.pu.p_idle() * (-r.t_ove / s.pu.tau_id_bar).exp();
        assert!(total < idle_through_reservation);
        assert!(r.case_probabilities.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn throughput_is_continuous_in_sensing_time() {
        let s = fig5();
        let grid: Vec<f64> = (1..=60).map(|k| k as f64 * 0.25e-3).collect();
        let nts: Vec<f64> = grid.iter().map(|&t| evaluate(&s.with_t_s(t)).unwrap().nt).collect();
        for w in nts.windows(3) {
            let (d1, d2) = ((w[1] - w[0]).abs(), (w[2] - w[1]).abs());
            assert!(d2 <= 10.0 * d1.max(1e-6) && d1 <= 10.0 * d2.max(1e-6));
        }
    }

    #[test]
    fn longer_idle_periods_raise_throughput() {
        let base = fig5();
        let mut prev = 0.0;
        for tau in [0.05, 0.1, 0.15, 0.3, 0.6, 1.2] {
            let mut s = base;
            s.pu.tau_id_bar = tau;
            let nt = evaluate(&s).unwrap().nt;
            assert!(nt > prev, "tau_id = {tau}");
            prev = nt;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn full_duplex_wins_without_self_interference(t_s in 5e-4f64..1.5e-2, p_sen_db in -5.0f64..15.0) {
            let mut s = fig5();
            s.sic.zeta = 0.0;
            s.access.p_sen = db_to_linear(p_sen_db);
            s.access.t_s = t_s;
            let fd = evaluate(&s).unwrap().nt;
            s.access.mode = TxMode::Hdtx;
            let hd = evaluate(&s).unwrap().nt;
            prop_assert!(fd >= hd);
        }

        #[test]
        fn expected_bits_are_non_negative(t_s in 1e-4f64..1.5e-2, p_sen_db in -10.0f64..15.0, zeta in 0.0f64..1.0) {
            let mut s = fig5();
            s.sic.zeta = zeta;
            s.access.p_sen = db_to_linear(p_sen_db);
            s.access.t_s = t_s;
            let r = evaluate(&s).unwrap();
            prop_assert!(r.b1 >= 0.0 && r.b2 >= 0.0 && r.b3 >= 0.0 && r.b32 <= 0.0);
        }
    }
}
