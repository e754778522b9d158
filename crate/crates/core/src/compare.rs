//! Comparison policy for closure conditions `e_S ≥ f_S(R)/α`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{Counts, LossFunction};

/// Default relative tolerance.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// How `≥` between an e-value and a loss threshold is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ComparePolicy {
    /// `a ≥ b` holds when `a ≥ b − ε·max(|a|, |b|)`.
    RelativeEpsilon { epsilon: f64 },
    /// `e·α ≥ f` decided in exact rational arithmetic on the binary values.
    ExactRational,
}

impl Default for ComparePolicy {
    fn default() -> Self {
        ComparePolicy::RelativeEpsilon { epsilon: DEFAULT_EPSILON }
    }
}

impl ComparePolicy {
    pub fn relative(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(ComparePolicy::RelativeEpsilon { epsilon })
        } else {
            Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")))
        }
    }

    /// `a ≥ b` under this policy.
    pub fn ge(&self, a: f64, b: f64) -> bool {
        if a >= b {
            return true;
        }
        match self {
            ComparePolicy::RelativeEpsilon { epsilon } => {
                a.is_finite() && b.is_finite() && b - a <= epsilon * a.abs().max(b.abs())
            }
            ComparePolicy::ExactRational => false,
        }
    }

    /// `a ≤ b` under this policy.
    pub fn le(&self, a: f64, b: f64) -> bool {
        self.ge(b, a)
    }

    /// The closure condition `e ≥ f/α` for the loss evaluated at `counts`.
    pub fn satisfies(&self, e: f64, loss: &LossFunction, counts: Counts, alpha: f64) -> bool {
        match self {
            ComparePolicy::RelativeEpsilon { .. } => {
                let f = loss.eval_counts(counts);
                f <= 0.0 || self.ge(e, f / alpha)
            }
            ComparePolicy::ExactRational => {
                if e == f64::INFINITY {
                    return true;
                }
                let f = loss.eval_counts_exact(counts);
                if !f.is_positive() {
                    return true;
                }
                let e = BigRational::from_float(e).expect("finite e-value");
                let a = BigRational::from_float(alpha).expect("finite alpha");
                e * a >= f
            }
        }
    }
}

/// `num / den` with `0/0 = 0` and `x/0 = +∞` for `x > 0`.
pub fn extended_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        num.signum() * f64::INFINITY
    } else {
        num / den
    }
}
