//! Per-hypothesis value vectors and the orderings derived from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::MAX_HYPOTHESES;

/// What the entries of a [`ValueVector`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Pvalue,
    Evalue,
    KnockoffStat,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Pvalue => "pvalue",
            ValueKind::Evalue => "evalue",
            ValueKind::KnockoffStat => "knockoff_stat",
        })
    }
}

/// A validated vector of p-values, e-values or knockoff statistics.
///
/// p-values lie in [0, 1], e-values in [0, +∞], knockoff statistics are
/// finite. Length is between 1 and 64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValueVector", into = "RawValueVector")]
pub struct ValueVector {
    kind: ValueKind,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawValueVector {
    kind: ValueKind,
    #[serde(with = "crate::serde_ext::reals")]
    values: Vec<f64>,
}

impl TryFrom<RawValueVector> for ValueVector {
    type Error = Error;
    fn try_from(raw: RawValueVector) -> Result<Self> {
        ValueVector::new(raw.kind, raw.values)
    }
}

impl From<ValueVector> for RawValueVector {
    fn from(v: ValueVector) -> Self {
        RawValueVector { kind: v.kind, values: v.values }
    }
}

impl ValueVector {
    pub fn new(kind: ValueKind, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 || m > MAX_HYPOTHESES {
            return Err(Error::InvalidCount { m, max: MAX_HYPOTHESES });
        }
        for (i, &v) in values.iter().enumerate() {
            let ok = match kind {
                ValueKind::Pvalue => (0.0..=1.0).contains(&v),
                ValueKind::Evalue => v >= 0.0,
                ValueKind::KnockoffStat => v.is_finite(),
            };
            if !ok {
                return Err(Error::ValueOutOfRange { kind, index: i + 1, value: v });
            }
        }
        Ok(ValueVector { kind, values })
    }

    pub fn pvalues(values: Vec<f64>) -> Result<Self> {
        Self::new(ValueKind::Pvalue, values)
    }

    pub fn evalues(values: Vec<f64>) -> Result<Self> {
        Self::new(ValueKind::Evalue, values)
    }

    pub fn knockoff(values: Vec<f64>) -> Result<Self> {
        Self::new(ValueKind::KnockoffStat, values)
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// The values, provided they are of the `expected` kind.
    pub fn expect(&self, expected: ValueKind) -> Result<&[f64]> {
        if self.kind == expected {
            Ok(&self.values)
        } else {
            Err(Error::KindMismatch { expected, found: self.kind })
        }
    }
}

/// Indices sorted by decreasing value, ties by smallest index.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Indices sorted by increasing value, ties by smallest index.
pub fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Checks that `ordering` is a permutation of `0..m`.
pub fn check_permutation(ordering: &[usize], m: usize) -> Result<()> {
    if ordering.len() != m {
        return Err(Error::Domain(format!("ordering has length {}, expected {m}", ordering.len())));
    }
    let mut seen = vec![false; m];
    for &i in ordering {
        if i >= m || seen[i] {
            return Err(Error::Domain("ordering is not a permutation".into()));
        }
        seen[i] = true;
    }
    Ok(())
}
