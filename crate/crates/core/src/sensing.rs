//! Energy detection while the sensing SU is itself transmitting.
//!
//! The residual self-interference `I(p_sen)` adds to the noise floor seen by
//! the detector. A PU arriving at time `t` inside the sensing window only
//! contributes `(t_s - t) / t_s` of the samples, and the arrival time is
//! averaged over its exponential law conditioned on `0 <= t <= t_s`.
//!
//! Integrals over `[0, t_s]` are computed on the unit interval `u = t / t_s`,
//! which keeps the quadrature tolerance independent of the window length.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gauss::{normal_pdf, q_inverse, q_unchecked};
use crate::model::{PuModel, SensingConfig, SicModel};
use crate::quadrature;

/// Absolute tolerance for every integral over the sensing window.
pub const QUAD_TOL: f64 = 1e-10;
const QUAD_SEGMENTS: usize = 400;

/// Calibrated detector at one `(t_s, p_sen)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingOutcomeModel {
    pub pf00: f64,
    pub epsilon_star: f64,
    /// PU signal to noise-plus-self-interference ratio at the sensing receiver.
    pub gamma_ps: f64,
    pub pd_avg: f64,
}

/// Single-Q approximation of the false-alarm probability with its derivatives in `t_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pf00Approximation {
    pub pf00: f64,
    pub d_pf00_dts: f64,
    pub d2_pf00_dts2: f64,
    pub gamma_bar: f64,
    pub gamma1_bar: f64,
    pub alpha_bar: f64,
    pub t_s: f64,
    pub f_s: f64,
}

impl Pf00Approximation {
    /// Approximate false alarm at another sensing time, holding the fitted constants.
    pub fn pf00_at(&self, t_s: f64) -> f64 {
        q_unchecked(self.alpha_bar + self.gamma_bar * (self.f_s * t_s).sqrt())
    }

    /// `(d/dt_s, d^2/dt_s^2)` of [`Self::pf00_at`].
    pub fn derivatives_at(&self, t_s: f64) -> (f64, f64) {
        let g = self.gamma_bar * (self.f_s * t_s).sqrt();
        let y = self.alpha_bar + g;
        let pdf = normal_pdf(y);
        let d1 = -g / (2.0 * t_s) * pdf;
        let d2 = g / (4.0 * t_s * t_s) * pdf * (1.0 + y * g);
        (d1, d2)
    }
}

/// Detection statistic for a fixed threshold, as a function of the fraction
/// `w` of the window during which the PU is present.
#[derive(Debug, Clone, Copy)]
struct DetectionKernel {
    x: f64,
    gamma_ps: f64,
    sqrt_n: f64,
}

impl DetectionKernel {
    fn new(eps: f64, t_s: f64, p_sen: f64, p_pu: f64, sc: &SensingConfig, sic: &SicModel) -> Self {
        let ni = sc.n0_noise + sic.interference(p_sen);
        Self {
            x: eps / ni,
            gamma_ps: p_pu / ni,
            sqrt_n: (sc.f_s * t_s).sqrt(),
        }
    }

    #[inline]
    fn probability(&self, w: f64) -> f64 {
        let g1 = self.gamma_ps + 1.0;
        let spread = (w * g1 * g1 + (1.0 - w)).sqrt();
        q_unchecked((self.x - w * self.gamma_ps - 1.0) * self.sqrt_n / spread)
    }
}

fn check_window(function: &'static str, t_s: f64) -> Result<()> {
    if !(t_s > 0.0) || !t_s.is_finite() {
        return Err(domain(function, format!("sensing time must be positive and finite, got {t_s}")));
    }
    Ok(())
}

fn check_threshold(function: &'static str, eps: f64) -> Result<()> {
    if !(eps >= 0.0) {
        return Err(domain(function, format!("threshold must be >= 0, got {eps}")));
    }
    Ok(())
}

/// False alarm when the channel stays idle for the whole sensing window.
pub fn false_alarm_p00(eps: f64, t_s: f64, p_sen: f64, sc: &SensingConfig, sic: &SicModel) -> Result<f64> {
    check_window("false_alarm_p00", t_s)?;
    check_threshold("false_alarm_p00", eps)?;
    Ok(DetectionKernel::new(eps, t_s, p_sen, 0.0, sc, sic).probability(0.0))
}

/// Detection probability when the PU becomes active at `t` inside the window.
pub fn detection_p01(
    eps: f64,
    t_s: f64,
    t: f64,
    p_sen: f64,
    p_pu: f64,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<f64> {
    check_window("detection_p01", t_s)?;
    check_threshold("detection_p01", eps)?;
    if !(0.0..=t_s).contains(&t) {
        return Err(domain("detection_p01", format!("arrival time {t} outside [0, {t_s}]")));
    }
    let w = ((t_s - t) / t_s).clamp(0.0, 1.0);
    Ok(DetectionKernel::new(eps, t_s, p_sen, p_pu, sc, sic).probability(w))
}

/// Density of `u = t / t_s` when `t` is exponential with mean `tau` conditioned on `t <= t_s`.
fn conditional_density(t_s: f64, tau: f64) -> impl Fn(f64) -> f64 {
    let lambda = t_s / tau;
    let norm = if lambda == 0.0 {
        1.0
    } else {
        lambda / -(-lambda).exp_m1()
    };
    move |u: f64| norm * (-lambda * u).exp()
}

/// `t_s * ∫_0^1 P_d01(u t_s) weight(u) du`, the common shape of every
/// sensing-window integral in the model.
pub(crate) fn integrate_detection<W: Fn(f64) -> f64>(
    eps: f64,
    t_s: f64,
    p_sen: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
    weight: W,
) -> Result<f64> {
    let k = DetectionKernel::new(eps, t_s, p_sen, pu.p_pu, sc, sic);
    let r = quadrature::integrate(
        |u| k.probability(1.0 - u) * weight(u),
        0.0,
        1.0,
        QUAD_TOL,
        QUAD_SEGMENTS,
    )?;
    Ok(r.value)
}

/// Detection probability averaged over the PU arrival time inside the window.
pub fn average_detection(
    eps: f64,
    t_s: f64,
    p_sen: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<f64> {
    check_window("average_detection", t_s)?;
    check_threshold("average_detection", eps)?;
    let density = conditional_density(t_s, pu.tau_id_bar);
    let v = integrate_detection(eps, t_s, p_sen, pu, sc, sic, density)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Threshold at which the average detection probability equals `pd_target`.
///
/// The average detection probability decreases in the threshold, so the root
/// is found by bisection after doubling the upper end until it is bracketed.
pub fn calibrate_threshold(
    t_s: f64,
    p_sen: f64,
    pd_target: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<f64> {
    check_window("calibrate_threshold", t_s)?;
    if !(pd_target > 0.0 && pd_target < 1.0) {
        return Err(domain("calibrate_threshold", format!("target must lie in (0, 1), got {pd_target}")));
    }
    let pd = |eps: f64| average_detection(eps, t_s, p_sen, pu, sc, sic);

    let mut lo = 0.0;
    if pd(lo)? < pd_target {
        return Err(Error::Calibration(format!(
            "detection target {pd_target} is unreachable even with a zero threshold (t_s = {t_s}, p_sen = {p_sen})"
        )));
    }
    let ni = sc.n0_noise + sic.interference(p_sen);
    let mut hi = ni + pu.p_pu;
    let mut doublings = 0;
    while pd(hi)? >= pd_target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::Calibration(format!(
                "no threshold pushes detection below {pd_target} (t_s = {t_s}, p_sen = {p_sen})"
            )));
        }
    }

    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pd(mid)? >= pd_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (p_lo, p_hi) = (pd(lo)?, pd(hi)?);
    let eps = if (p_lo - pd_target).abs() <= (p_hi - pd_target).abs() { lo } else { hi };
    let residual = (pd(eps)? - pd_target).abs();
    if residual > 1e-9 {
        return Err(Error::Numerical {
            what: "threshold calibration",
            residual,
        });
    }
    Ok(eps)
}

/// Calibrates the detector and reports the resulting false alarm probability.
pub fn calibrated_outcome(
    t_s: f64,
    p_sen: f64,
    pd_target: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<SensingOutcomeModel> {
    let eps = calibrate_threshold(t_s, p_sen, pd_target, pu, sc, sic)?;
    outcome_for_threshold(eps, t_s, p_sen, pu, sc, sic)
}

fn outcome_for_threshold(
    eps: f64,
    t_s: f64,
    p_sen: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<SensingOutcomeModel> {
    Ok(SensingOutcomeModel {
        pf00: false_alarm_p00(eps, t_s, p_sen, sc, sic)?,
        epsilon_star: eps,
        gamma_ps: pu.p_pu / (sc.n0_noise + sic.interference(p_sen)),
        pd_avg: average_detection(eps, t_s, p_sen, pu, sc, sic)?,
    })
}

/// Fits `P̂_d(ε) ≈ Q((ε/NI − γ̄ − 1)√(f_s t_s)/(γ̄₁ + 1))` around the calibrated
/// threshold and derives the single-Q false alarm form with its derivatives.
///
/// The fit is a least-squares line in probit space over a log-spaced grid of
/// thresholds spanning about ±1.5 standard deviations of the detector output.
pub fn approx_pf00_and_derivatives(
    t_s: f64,
    p_sen: f64,
    pd_target: f64,
    pu: &PuModel,
    sc: &SensingConfig,
    sic: &SicModel,
) -> Result<Pf00Approximation> {
    let eps_star = calibrate_threshold(t_s, p_sen, pd_target, pu, sc, sic)?;
    let ni = sc.n0_noise + sic.interference(p_sen);
    let n = sc.f_s * t_s;
    let sqrt_n = n.sqrt();
    let gamma_ps = pu.p_pu / ni;

    let half_width = 1.5 * ni * (gamma_ps + 1.0) / sqrt_n;
    let h = (half_width / eps_star).ln_1p();
    const POINTS: usize = 11;
    let mut xs = Vec::with_capacity(POINTS);
    let mut zs = Vec::with_capacity(POINTS);
    for i in 0..POINTS {
        let s = -h + 2.0 * h * i as f64 / (POINTS - 1) as f64;
        let eps = eps_star * s.exp();
        let pd = average_detection(eps, t_s, p_sen, pu, sc, sic)?;
        if pd > 1e-14 && pd < 1.0 - 1e-14 {
            xs.push(eps / ni);
            zs.push(q_inverse(pd)?);
        }
    }
    if xs.len() < 3 {
        return Err(Error::ApproximationUnavailable(format!(
            "only {} usable fit points at t_s = {t_s}",
            xs.len()
        )));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let mz = zs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mx) * (z - mz)).sum();
    let a = sxz / sxx;
    let b = mz - a * mx;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::ApproximationUnavailable(format!("non-positive probit slope {a}")));
    }
    let gamma1_bar = sqrt_n / a - 1.0;
    let gamma_bar = -b / a - 1.0;
    let alpha_bar = (gamma1_bar + 1.0) * q_inverse(pd_target)?;
    if !(gamma_bar > 0.0) {
        return Err(Error::ApproximationUnavailable(format!(
            "fitted gamma_bar = {gamma_bar} is not positive"
        )));
    }
    // 1 + y·g > 0 for every g > 0 exactly when alpha_bar > -2.
    if !(alpha_bar > -2.0) {
        return Err(Error::ApproximationUnavailable(format!(
            "alpha_bar = {alpha_bar} admits a non-convex false-alarm curve"
        )));
    }
    let mut out = Pf00Approximation {
        pf00: 0.0,
        d_pf00_dts: 0.0,
        d2_pf00_dts2: 0.0,
        gamma_bar,
        gamma1_bar,
        alpha_bar,
        t_s,
        f_s: sc.f_s,
    };
    out.pf00 = out.pf00_at(t_s);
    (out.d_pf00_dts, out.d2_pf00_dts2) = out.derivatives_at(t_s);
    Ok(out)
}

type CacheKey = [u64; 9];

/// Thread-safe memo of calibrated thresholds.
///
/// The key covers every input of [`calibrate_threshold`], so one cache can be
/// shared across scenarios.
#[derive(Debug, Default)]
pub struct CalibrationCache {
    map: RwLock<HashMap<CacheKey, f64>>,
}

impl CalibrationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn calibrate(
        &self,
        t_s: f64,
        p_sen: f64,
        pd_target: f64,
        pu: &PuModel,
        sc: &SensingConfig,
        sic: &SicModel,
    ) -> Result<f64> {
        let key = [
            t_s, p_sen, pd_target, pu.tau_id_bar, pu.p_pu, sc.f_s, sc.n0_noise, sic.zeta, sic.xi,
        ]
        .map(f64::to_bits);
        if let Some(eps) = self.map.read().ok().and_then(|m| m.get(&key).copied()) {
            return Ok(eps);
        }
        let eps = calibrate_threshold(t_s, p_sen, pd_target, pu, sc, sic)?;
        if let Ok(mut m) = self.map.write() {
            m.insert(key, eps);
        }
        Ok(eps)
    }
}
