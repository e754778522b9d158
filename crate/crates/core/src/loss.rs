//! Loss functions `f_N(R)` for multiple testing error rates.
//!
//! Every loss here depends on `(N, R)` only through the three counts
//! `|N ∩ R|`, `|N|` and `|R|`. The engine and the shortcut algorithms rely on
//! that: it lets them reason about whole classes of null sets at once.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::subset::Subset;

/// The counts a loss depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    /// `|N ∩ R|`
    pub overlap: usize,
    /// `|N|`
    pub null: usize,
    /// `|R|`
    pub rejected: usize,
}

impl Counts {
    pub fn of(null: Subset, rejected: Subset) -> Self {
        Counts {
            overlap: null.intersection(rejected).len(),
            null: null.len(),
            rejected: rejected.len(),
        }
    }
}

/// A loss function `(N, R) ↦ f_N(R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossSpec", into = "LossSpec")]
pub enum LossFunction {
    /// False discovery proportion `|R∩N| / (|R| ∨ 1)`.
    Fdp,
    /// `1{|N∩R| ≥ k}`; `k = 1` is the familywise error.
    KFwer { k: usize },
    /// Number of false discoveries `|N∩R|`.
    Pfer,
    /// `1{FDP > γ}`.
    Fdx { gamma: f64 },
    /// `|N∩R| / (|N| ∨ 1)`.
    Aer,
    /// Number of discoveries `|R|`, the usual denominator of ratio metrics.
    Rejections,
    /// `1{|R \ N| < d}`. Not a proper loss (it is 1 at `R = ∅` for `d ≥ 1`);
    /// used to characterise true-discovery bounds.
    TrueDiscoveryShortfall { d: usize },
    /// `(f − α·g) / η`, which may be negative.
    Ratio { f: Box<LossFunction>, g: Box<LossFunction>, eta: f64, alpha: f64 },
}

impl LossFunction {
    pub fn fwer() -> Self {
        LossFunction::KFwer { k: 1 }
    }

    pub fn kfwer(k: usize) -> Result<Self> {
        let l = LossFunction::KFwer { k };
        l.validate()?;
        Ok(l)
    }

    pub fn fdx(gamma: f64) -> Result<Self> {
        let l = LossFunction::Fdx { gamma };
        l.validate()?;
        Ok(l)
    }

    pub fn true_discovery_shortfall(d: usize) -> Self {
        LossFunction::TrueDiscoveryShortfall { d }
    }

    /// Checks parameter domains, recursively for ratio losses.
    pub fn validate(&self) -> Result<()> {
        match self {
            LossFunction::KFwer { k } if *k == 0 => Err(Error::InvalidLoss("k must be at least 1".into())),
            LossFunction::Fdx { gamma } if !(0.0..1.0).contains(gamma) => {
                Err(Error::InvalidLoss(format!("gamma must be in [0, 1), got {gamma}")))
            }
            LossFunction::Ratio { f, g, eta, alpha } => {
                if !(*eta > 0.0 && eta.is_finite()) {
                    return Err(Error::InvalidLoss(format!("eta must be positive, got {eta}")));
                }
                check_alpha(*alpha)?;
                f.validate()?;
                g.validate()
            }
            _ => Ok(()),
        }
    }

    /// `f_N(R)`.
    pub fn eval(&self, null: Subset, rejected: Subset) -> f64 {
        self.eval_counts(Counts::of(null, rejected))
    }

    /// `f_N(R)` from the counts it depends on.
    pub fn eval_counts(&self, c: Counts) -> f64 {
        match self {
            LossFunction::Fdp => ratio_or_zero(c.overlap, c.rejected.max(1)),
            LossFunction::KFwer { k } => indicator(c.overlap >= *k),
            LossFunction::Pfer => c.overlap as f64,
            // a / r > γ  ⟺  a > γ r  (r ≥ 1 whenever a ≥ 1)
            LossFunction::Fdx { gamma } => indicator(c.overlap as f64 > gamma * c.rejected.max(1) as f64),
            LossFunction::Aer => ratio_or_zero(c.overlap, c.null.max(1)),
            LossFunction::Rejections => c.rejected as f64,
            LossFunction::TrueDiscoveryShortfall { d } => indicator(c.rejected - c.overlap < *d),
            LossFunction::Ratio { f, g, eta, alpha } => (f.eval_counts(c) - alpha * g.eval_counts(c)) / eta,
        }
    }

    /// `f_N(R)` as an exact rational. Float parameters are converted exactly.
    pub fn eval_counts_exact(&self, c: Counts) -> BigRational {
        let int = |x: usize| BigRational::from_integer(BigInt::from(x));
        let ind = |b: bool| if b { BigRational::one() } else { BigRational::zero() };
        match self {
            LossFunction::Fdp => int(c.overlap) / int(c.rejected.max(1)),
            LossFunction::KFwer { k } => ind(c.overlap >= *k),
            LossFunction::Pfer => int(c.overlap),
            LossFunction::Fdx { gamma } => {
                let g = BigRational::from_float(*gamma).expect("finite gamma");
                ind(int(c.overlap) > g * int(c.rejected.max(1)))
            }
            LossFunction::Aer => int(c.overlap) / int(c.null.max(1)),
            LossFunction::Rejections => int(c.rejected),
            LossFunction::TrueDiscoveryShortfall { d } => ind(c.rejected - c.overlap < *d),
            LossFunction::Ratio { f, g, eta, alpha } => {
                let a = BigRational::from_float(*alpha).expect("finite alpha");
                let e = BigRational::from_float(*eta).expect("finite eta");
                (f.eval_counts_exact(c) - a * g.eval_counts_exact(c)) / e
            }
        }
    }

    /// An upper bound on the loss over all `(N, R)` with `N, R ⊆ [m]`.
    pub fn upper_bound(&self, m: usize) -> f64 {
        match self {
            LossFunction::Fdp
            | LossFunction::KFwer { .. }
            | LossFunction::Fdx { .. }
            | LossFunction::Aer
            | LossFunction::TrueDiscoveryShortfall { .. } => 1.0,
            LossFunction::Pfer | LossFunction::Rejections => m as f64,
            LossFunction::Ratio { f, eta, .. } => f.upper_bound(m).max(0.0) / eta,
        }
    }

    /// Whether `f_N(∅) = 0` for every `N`.
    pub fn vanishes_on_empty(&self) -> bool {
        match self {
            LossFunction::TrueDiscoveryShortfall { d } => *d == 0,
            LossFunction::Ratio { f, g, .. } => f.vanishes_on_empty() && g.vanishes_on_empty(),
            _ => true,
        }
    }
}

/// `(f − α·g)/η`, for ratio metrics such as mFDR.
pub fn ratio_to_expectation_loss(f: LossFunction, g: LossFunction, eta: f64, alpha: f64) -> Result<LossFunction> {
    let l = LossFunction::Ratio { f: Box::new(f), g: Box::new(g), eta, alpha };
    l.validate()?;
    Ok(l)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if num == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl fmt::Display for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossFunction::Fdp => f.write_str("fdp"),
            LossFunction::KFwer { k: 1 } => f.write_str("fwer"),
            LossFunction::KFwer { k } => write!(f, "kfwer({k})"),
            LossFunction::Pfer => f.write_str("pfer"),
            LossFunction::Fdx { gamma } => write!(f, "fdx({gamma})"),
            LossFunction::Aer => f.write_str("aer"),
            LossFunction::Rejections => f.write_str("rejections"),
            LossFunction::TrueDiscoveryShortfall { d } => write!(f, "shortfall({d})"),
            LossFunction::Ratio { f: a, g, eta, alpha } => write!(f, "ratio({a},{g},{eta},{alpha})"),
        }
    }
}

/// Parses the short forms `fdp`, `fdr`, `fwer`, `pfer`, `aer`, `kfwer:K`
/// and `fdx:GAMMA`.
impl FromStr for LossFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let bad = || Error::InvalidLoss(format!("cannot parse loss {s:?}"));
        match (name, arg) {
            ("fdp" | "fdr", None) => Ok(LossFunction::Fdp),
            ("fwer", None) => Ok(LossFunction::fwer()),
            ("pfer", None) => Ok(LossFunction::Pfer),
            ("aer", None) => Ok(LossFunction::Aer),
            ("kfwer", Some(a)) => LossFunction::kfwer(a.parse().map_err(|_| bad())?),
            ("fdx", Some(a)) => LossFunction::fdx(a.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// Wire format of [`LossFunction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Fdp,
    Fwer,
    Kfwer { k: usize },
    Pfer,
    Fdx { gamma: f64 },
    Aer,
    Rejections,
    TrueDiscoveryShortfall { d: usize },
    Ratio { f: Box<LossSpec>, g: Box<LossSpec>, eta: f64, alpha: f64 },
}

impl TryFrom<LossSpec> for LossFunction {
    type Error = Error;

    fn try_from(s: LossSpec) -> Result<Self> {
        let l = match s {
            LossSpec::Fdp => LossFunction::Fdp,
            LossSpec::Fwer => LossFunction::fwer(),
            LossSpec::Kfwer { k } => LossFunction::KFwer { k },
            LossSpec::Pfer => LossFunction::Pfer,
            LossSpec::Fdx { gamma } => LossFunction::Fdx { gamma },
            LossSpec::Aer => LossFunction::Aer,
            LossSpec::Rejections => LossFunction::Rejections,
            LossSpec::TrueDiscoveryShortfall { d } => LossFunction::TrueDiscoveryShortfall { d },
            LossSpec::Ratio { f, g, eta, alpha } => LossFunction::Ratio {
                f: Box::new(LossFunction::try_from(*f)?),
                g: Box::new(LossFunction::try_from(*g)?),
                eta,
                alpha,
            },
        };
        l.validate()?;
        Ok(l)
    }
}

impl From<LossFunction> for LossSpec {
    fn from(l: LossFunction) -> Self {
        match l {
            LossFunction::Fdp => LossSpec::Fdp,
            LossFunction::KFwer { k: 1 } => LossSpec::Fwer,
            LossFunction::KFwer { k } => LossSpec::Kfwer { k },
            LossFunction::Pfer => LossSpec::Pfer,
            LossFunction::Fdx { gamma } => LossSpec::Fdx { gamma },
            LossFunction::Aer => LossSpec::Aer,
            LossFunction::Rejections => LossSpec::Rejections,
            LossFunction::TrueDiscoveryShortfall { d } => LossSpec::TrueDiscoveryShortfall { d },
            LossFunction::Ratio { f, g, eta, alpha } => LossSpec::Ratio {
                f: Box::new((*f).into()),
                g: Box::new((*g).into()),
                eta,
                alpha,
            },
        }
    }
}
