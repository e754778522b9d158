//! p-to-e calibrators and the special functions behind them.

use serde::{Deserialize, Serialize};

use crate::compare::ComparePolicy;
use crate::error::{check_alpha, Error, Result};
use crate::subset::Subset;
use crate::values::{ValueKind, ValueVector};

const LAMBERT_TOL: f64 = 1e-12;
const LAMBERT_MAX_ITER: usize = 100;
const SNAP_TOL: f64 = 1e-12;

/// Lower branch `W₋₁` of the Lambert W function on `[−1/e, 0)`.
///
/// Returns `w ≤ −1` with `w·eʷ = x`. Uses Halley's method from the
/// asymptotic seed `log(−x) − log(−log(−x))`; close to the branch point the
/// seed switches to the series in `p = −√(2(1 + e·x))`.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    let branch = -std::f64::consts::E.recip();
    if !(x < 0.0) || x < branch - 4.0 * f64::EPSILON * branch.abs() {
        return Err(Error::Domain(format!("lambert_w_minus1 needs x in [-1/e, 0), got {x}")));
    }
    let q = 1.0 + std::f64::consts::E * x;
    if q <= 4.0 * f64::EPSILON {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = -(2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    for _ in 0..LAMBERT_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        let done = (next - w).abs() <= LAMBERT_TOL * next.abs();
        w = next.min(-1.0);
        if done {
            break;
        }
    }
    Ok(w)
}

/// `ℓ_α = −W₋₁(−α/e)`, the scale of the Su calibrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuConstants {
    pub alpha: f64,
    pub ell: f64,
}

impl SuConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let ell = -lambert_w_minus1(-alpha / std::f64::consts::E)?;
        Ok(SuConstants { alpha, ell })
    }

    /// `(ℓ_α·p ∨ α)⁻¹`.
    pub fn calibrate(&self, p: f64) -> f64 {
        1.0 / (self.ell * p).max(self.alpha)
    }
}

/// The Su calibrator `(ℓ_α·p ∨ α)⁻¹`.
pub fn su_calibrate(p: f64, alpha: f64) -> Result<f64> {
    check_p(p)?;
    Ok(SuConstants::new(alpha)?.calibrate(p))
}

/// Harmonic numbers `h[k] = Σ_{i≤k} 1/i`, with `h[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTable {
    h: Vec<f64>,
}

impl HarmonicTable {
    pub fn new(m: usize) -> Self {
        let mut h = Vec::with_capacity(m + 1);
        h.push(0.0);
        let mut acc = 0.0;
        for i in 1..=m {
            acc += 1.0 / i as f64;
            h.push(acc);
        }
        HarmonicTable { h }
    }

    pub fn get(&self, k: usize) -> f64 {
        self.h[k]
    }

    pub fn len(&self) -> usize {
        self.h.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ceiling that first snaps values within relative `1e-12` of an integer.
pub fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// The BY calibrator `k·1{h_k p ≤ α} / (α(⌈k h_k p/α⌉ ∨ 1))`.
pub fn by_calibrate(p: f64, k: usize, alpha: f64) -> Result<f64> {
    check_p(p)?;
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    Ok(by_calibrate_unchecked(p, k, alpha, HarmonicTable::new(k).get(k)))
}

pub(crate) fn by_calibrate_unchecked(p: f64, k: usize, alpha: f64, h_k: f64) -> f64 {
    // the summand of the BY local e-value, times k
    k as f64 * by_term(p, k, alpha, h_k)
}

/// `1{h_k p ≤ α} / (α(⌈k h_k p/α⌉ ∨ 1))`.
pub(crate) fn by_term(p: f64, k: usize, alpha: f64, h_k: f64) -> f64 {
    if !ComparePolicy::default().le(h_k * p, alpha) {
        return 0.0;
    }
    let c = snapped_ceil(k as f64 * h_k * p / alpha).max(1.0);
    1.0 / (alpha * c)
}

/// Simes combination `min_i |S|·p_(i:S)/i`, capped at 1.
pub fn simes_p(p: &ValueVector, s: Subset) -> Result<f64> {
    let values = p.expect(ValueKind::Pvalue)?;
    s.check_fits(values.len())?;
    if s.is_empty() {
        return Err(Error::Domain("Simes combination needs a nonempty set".into()));
    }
    let mut sub: Vec<f64> = s.iter().map(|i| values[i]).collect();
    sub.sort_by(f64::total_cmp);
    Ok(simes_sorted(&sub))
}

/// Simes combination of already sorted p-values.
pub(crate) fn simes_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &p)| n * p / (i + 1) as f64)
        .fold(1.0, f64::min)
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("p-value must be in [0, 1], got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambert_special_points() {
        let b = -std::f64::consts::E.recip();
        assert_eq!(lambert_w_minus1(b).unwrap(), -1.0);
        let x = -2.0 * (-2.0f64).exp();
        assert!((lambert_w_minus1(x).unwrap() + 2.0).abs() < 1e-12);
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(-0.5).is_err());
        assert!(lambert_w_minus1(0.1).is_err());
    }

    #[test]
    fn lambert_round_trip_on_log_grid() {
        let b = std::f64::consts::E.recip();
        for i in 0..=400 {
            // from -1e-300 up to almost the branch point
            let t = i as f64 / 400.0;
            let x = -(b * (1.0 - 1e-14)).powf(t) * 1e-300f64.powf(1.0 - t);
            let w = lambert_w_minus1(x).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs(), "x = {x}, w = {w}");
        }
        for d in [1e-3, 1e-6, 1e-9, 1e-12] {
            let x = -b + d;
            let w = lambert_w_minus1(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs(), "x = {x}, w = {w}");
        }
    }

    #[test]
    fn su_constant_fixed_point() {
        for alpha in [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let c = SuConstants::new(alpha).unwrap();
            assert!(c.ell > 1.0);
            let rhs = (alpha / c.ell) * (1.0 + (c.ell / alpha).ln());
            assert!((rhs - alpha).abs() < 1e-10, "alpha = {alpha}");
        }
        assert!((SuConstants::new(1.0).unwrap().ell - 1.0).abs() < 1e-7);
    }

    #[test]
    fn su_calibrate_examples() {
        assert_eq!(su_calibrate(0.0, 0.05).unwrap(), 20.0);
        let v = su_calibrate(1.0, 0.05).unwrap();
        assert_eq!((v * 1000.0).round() / 1000.0, 0.174);
        assert!(su_calibrate(0.5, 0.0).is_err());
        assert!(su_calibrate(1.5, 0.05).is_err());
    }

    #[test]
    fn su_calibrator_integrates_to_one() {
        // ∫₀¹ by composite Simpson on a grid refined near the kink at α/ℓ
        let c = SuConstants::new(0.05).unwrap();
        let kink = c.alpha / c.ell;
        let simpson = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let mut s = c.calibrate(a) + c.calibrate(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * c.calibrate(a + i as f64 * h);
            }
            s * h / 3.0
        };
        // 1/(ℓp) has a log singularity-free but steep shape; split geometrically
        let mut total = simpson(0.0, kink, 2);
        let mut lo = kink;
        while lo < 1.0 {
            let hi = (lo * 2.0).min(1.0);
            total += simpson(lo, hi, 2000);
            lo = hi;
        }
        assert!((total - 1.0).abs() < 1e-6, "integral = {total}");
    }

    #[test]
    fn by_calibrate_examples() {
        assert_eq!(by_calibrate(0.0, 5, 0.05).unwrap(), 100.0);
        assert_eq!(by_calibrate(1.0, 3, 0.05).unwrap(), 0.0);
        assert_eq!(by_calibrate(0.03, 1, 0.05).unwrap(), 20.0);
        assert!(by_calibrate(0.5, 0, 0.05).is_err());
    }

    #[test]
    fn snapped_ceil_absorbs_jitter() {
        assert_eq!(snapped_ceil(2.0000000000000004), 2.0);
        assert_eq!(snapped_ceil(1.9999999999999998), 2.0);
        assert_eq!(snapped_ceil(2.001), 3.0);
        assert_eq!(snapped_ceil(0.6), 1.0);
    }

    #[test]
    fn simes_examples() {
        let p = ValueVector::pvalues(vec![0.02]).unwrap();
        assert_eq!(simes_p(&p, Subset::singleton(0)).unwrap(), 0.02);
        let p = ValueVector::pvalues(vec![0.0029, 0.013053, 0.013053]).unwrap();
        let v = simes_p(&p, Subset::full(3)).unwrap();
        assert!((v - 3.0 * 0.0029).abs() < 1e-15);
        let p = ValueVector::pvalues(vec![0.3; 5]).unwrap();
        assert!((simes_p(&p, Subset::full(5)).unwrap() - 0.3).abs() < 1e-15);
        assert!(simes_p(&p, Subset::EMPTY).is_err());
        let p = ValueVector::pvalues(vec![0.9, 0.8]).unwrap();
        assert_eq!(simes_p(&p, Subset::full(2)).unwrap(), 0.9);
    }

    #[test]
    fn harmonic_numbers() {
        let h = HarmonicTable::new(11);
        assert_eq!(h.get(1), 1.0);
        assert!((h.get(11) - 3.0198773448773446).abs() < 1e-15);
        assert!((1..11).all(|k| h.get(k) < h.get(k + 1)));
    }
}
