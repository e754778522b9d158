//! Boosting by truncation and stochastic rounding of e-collections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibrators::SuConstants;
use crate::collections::{table_collection, ECollection};
use crate::engine::Engine;
use crate::error::{check_alpha, Error, Result};
use crate::loss::LossFunction;
use crate::subset::Subset;

const GRID_TOL: f64 = 1e-12;

/// The attainable thresholds `{r/(αk) : k ∈ [m], r ∈ [k ∧ cap]} ∪ {0}`,
/// sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationGrid {
    pub alpha: f64,
    pub m: usize,
    pub cap: usize,
    values: Vec<f64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl TruncationGrid {
    pub fn new(alpha: f64, m: usize, cap: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if m == 0 || cap == 0 {
            return Err(Error::Domain("truncation grid needs m ≥ 1 and cap ≥ 1".into()));
        }
        let mut pairs = Vec::new();
        for k in 1..=m {
            for r in 1..=k.min(cap) {
                let g = gcd(r, k);
                pairs.push((r / g, k / g));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut values: Vec<f64> = pairs.into_iter().map(|(r, k)| r as f64 / (alpha * k as f64)).collect();
        values.push(0.0);
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(TruncationGrid { alpha, m, cap, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("grid contains 0")
    }
}

/// Largest grid element `≤ x`, allowing `x` to fall short by a relative
/// `1e-12`.
pub fn truncate(x: f64, grid: &TruncationGrid) -> f64 {
    let v = &grid.values;
    let idx = v.partition_point(|&g| g <= x || g - x <= GRID_TOL * g);
    v[idx.max(1) - 1]
}

/// Largest `b ∈ [1, b_max]` with `oracle(b, grid) ≤ 1`, by bisection to
/// absolute tolerance `tol`.
///
/// `oracle(b, grid)` must return `E[T(b·E)]` and be weakly increasing in `b`.
pub fn boost_factor<F>(oracle: F, grid: &TruncationGrid, tol: f64, b_max: f64) -> Result<f64>
where
    F: Fn(f64, &TruncationGrid) -> f64,
{
    if !(tol > 0.0) || !(b_max >= 1.0) {
        return Err(Error::Domain("boost_factor needs tol > 0 and b_max ≥ 1".into()));
    }
    let at_one = oracle(1.0, grid);
    if at_one > 1.0 + GRID_TOL {
        return Err(Error::Domain(format!("expectation at b = 1 is {at_one} > 1")));
    }
    if oracle(b_max, grid) <= 1.0 {
        return Ok(b_max);
    }
    let (mut lo, mut hi) = (1.0, b_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if oracle(mid, grid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `E[T(b·X)]` for `X` the Su calibrator applied to a uniform p-value.
///
/// `P(X ≥ y) = min(1, 1/(ℓy))` for `y ≤ 1/α` and 0 beyond.
pub fn su_uniform_expectation(b: f64, grid: &TruncationGrid, su: &SuConstants) -> f64 {
    let mut total = 0.0;
    let mut prev = 0.0;
    for &g in grid.values().iter().filter(|&&g| g > 0.0) {
        let y = g / b;
        let tail = if y <= 1.0 / su.alpha * (1.0 + GRID_TOL) { (1.0 / (su.ell * y)).min(1.0) } else { 0.0 };
        total += (g - prev) * tail;
        prev = g;
    }
    total
}

/// The shared uniform draw behind a stochastic rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingSource {
    pub u: f64,
    pub provenance: String,
}

impl RoundingSource {
    pub fn fixed(u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("rounding draw must be in [0, 1], got {u}")));
        }
        Ok(RoundingSource { u, provenance: "fixed".into() })
    }

    pub fn from_seed(seed: u64) -> Self {
        let u = ChaCha8Rng::seed_from_u64(seed).random::<f64>();
        RoundingSource { u, provenance: format!("chacha8:{seed}") }
    }
}

/// Rounds every `e_S` to `α̂⁻¹_S` or to the cap `b = max_S α̂⁻¹_S`, where
/// `α̂⁻¹_S = max_{R ∈ closure} f_S(R)/α`:
///
/// `ē_S = α̂⁻¹_S + (b − α̂⁻¹_S)·1{u ≤ (e_S − α̂⁻¹_S)/b}`.
///
/// Infeasible sets stay infeasible.
pub fn stochastic_round(
    engine: &Engine,
    c: &ECollection,
    loss: &LossFunction,
    alpha: f64,
    rounding: &RoundingSource,
) -> Result<ECollection> {
    let m = c.m();
    let closure = engine.enumerate_collection(c, loss, alpha)?;
    let n = 1usize << m;
    let mut thresholds = vec![0.0; n];
    for (bits, t) in thresholds.iter_mut().enumerate().skip(1) {
        let s = Subset::from_bits(bits as u64);
        *t = closure.iter().map(|&r| loss.eval(s, r) / alpha).fold(0.0, f64::max);
    }
    let cap = thresholds.iter().copied().fold(0.0, f64::max);
    let mut values = vec![0.0; n];
    for bits in 1..n {
        let s = Subset::from_bits(bits as u64);
        let e = c.evaluate(s);
        let t = thresholds[bits];
        values[bits] = if e.is_infinite() {
            e
        } else if cap == 0.0 {
            0.0
        } else if rounding.u <= (e - t) / cap {
            cap
        } else {
            t
        };
    }
    let label = format!("stochastic_round({}, {loss}, {alpha}, u={})", c.fingerprint(), rounding.u);
    table_collection(m, values, label)
}
