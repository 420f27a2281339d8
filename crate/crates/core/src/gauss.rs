//! Standard normal tail function and its inverse.
//!
//! `q_function(x) = P(Z > x)` for a standard normal `Z`, evaluated through the
//! complementary error function. The inverse starts from Acklam's rational
//! approximation of the normal quantile and is polished by safeguarded Newton
//! steps on the tail function itself.

// Tabulated coefficients are kept as published.
#![allow(clippy::excessive_precision)]

use statrs::function::erf::erfc;

use crate::error::{domain, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal tail probability `Q(x)`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("q_function", format!("argument must be finite, got {x}")));
    }
    Ok(q_unchecked(x))
}

/// Standard normal tail probability without the finiteness check.
///
/// `±inf` map to `0` and `1`; `NaN` propagates.
#[inline]
pub fn q_unchecked(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of the tail function: returns `x` with `Q(x) = prob`.
pub fn q_inverse(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(domain("q_inverse", format!("probability must lie in (0, 1), got {prob}")));
    }
    // Q^{-1}(p) = -Phi^{-1}(p)
    let mut x = -acklam_quantile(prob);

    // Q is strictly decreasing, so track a bracket [lo, hi] with Q(lo) > p > Q(hi).
    let mut lo = -40.0_f64;
    let mut hi = 40.0_f64;
    for _ in 0..100 {
        let residual = q_unchecked(x) - prob;
        if residual == 0.0 {
            break;
        }
        if residual > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let pdf = normal_pdf(x);
        let mut next = x + residual / pdf;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Acklam's rational approximation of the standard normal quantile
/// (relative error about 1.15e-9).
fn acklam_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Simpson integration of the normal density over [x, x + 12].
    fn tail_by_simpson(x: f64) -> f64 {
        let n = 200_000;
        let b = x + 12.0;
        let h = (b - x) / n as f64;
        let mut s = normal_pdf(x) + normal_pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * normal_pdf(x + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Bisection on the brute-force tail.
    fn inverse_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-8.0, 8.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if q_unchecked(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_is_half() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
    }

    #[test]
    fn five_percent_point_matches_quadrature() {
        let oracle = tail_by_simpson(1.644_853_6);
        assert_abs_diff_eq!(oracle, 0.05, epsilon = 1e-6);
        assert_abs_diff_eq!(q_function(1.644_853_6).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn matches_quadrature_over_range() {
        for &x in &[-3.0, -1.2, 0.3, 2.5, 5.0] {
            assert_abs_diff_eq!(q_function(x).unwrap(), tail_by_simpson(x), epsilon = 1e-10);
        }
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(q_function(f64::NAN).is_err());
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn inverse_of_eighty_percent() {
        let oracle = inverse_by_bisection(0.8);
        assert_abs_diff_eq!(oracle, -0.841_621_2, epsilon = 1e-6);
        assert_abs_diff_eq!(q_inverse(0.8).unwrap(), oracle, epsilon = 1e-9);
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
    }

    #[test]
    fn inverse_round_trip() {
        let x = q_inverse(q_function(1.3).unwrap()).unwrap();
        assert_abs_diff_eq!(x, 1.3, epsilon = 1e-9);
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-9] {
            let x = q_inverse(p).unwrap();
            assert_abs_diff_eq!(q_unchecked(x), p, epsilon = 1e-10);
        }
    }

    #[test]
    fn inverse_rejects_outside_unit_interval() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(q_inverse(p).is_err());
        }
    }

    proptest::proptest! {
        #[test]
        fn reflection_identity(x in -8.0f64..8.0) {
            let s = q_function(x).unwrap() + q_function(-x).unwrap();
            proptest::prop_assert!((s - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn strictly_decreasing(a in -6.0f64..6.0, d in 1e-3f64..4.0) {
            proptest::prop_assert!(q_function(a).unwrap() > q_function(a + d).unwrap());
        }

        #[test]
        fn inverse_is_consistent(p in 1e-9f64..(1.0 - 1e-9)) {
            let x = q_inverse(p).unwrap();
            proptest::prop_assert!((q_unchecked(x) - p).abs() <= 1e-10);
        }
    }
}
