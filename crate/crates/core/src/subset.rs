//! Bitmask subsets of the hypothesis index set `[m]`.
//!
//! Indices are 0-based inside the crate. `Display`, `Serialize` and
//! `Deserialize` use the 1-based numbering users see.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `m` representable by a [`Subset`].
pub const MAX_HYPOTHESES: usize = 64;

/// A subset of `[m]` stored as a 64-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The full set `[m]`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_HYPOTHESES, "m = {m} exceeds {MAX_HYPOTHESES}");
        if m == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << m) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_HYPOTHESES);
        Subset(1u64 << i)
    }

    /// Builds a subset from 0-based indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut bits = 0u64;
        for i in indices {
            assert!(i < MAX_HYPOTHESES);
            bits |= 1u64 << i;
        }
        Subset(bits)
    }

    /// Builds a subset from 1-based indices, checking they lie in `1..=m`.
    pub fn from_one_based(indices: &[usize], m: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i == 0 || i > m {
                return Err(Error::Domain(format!("index {i} outside 1..={m}")));
            }
            bits |= 1u64 << (i - 1);
        }
        Ok(Subset(bits))
    }

    /// The first `r` entries of `ordering`.
    pub fn prefix(ordering: &[usize], r: usize) -> Self {
        Subset::from_indices(ordering[..r].iter().copied())
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_HYPOTHESES && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | 1u64 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1u64 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn complement(self, m: usize) -> Self {
        Subset(Subset::full(m).0 & !self.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// True when every index is below `m`.
    pub fn fits(self, m: usize) -> bool {
        self.is_subset_of(Subset::full(m))
    }

    pub fn check_fits(self, m: usize) -> Result<()> {
        if self.fits(m) {
            Ok(())
        } else {
            Err(Error::SubsetOutOfRange { subset: self.to_string(), m })
        }
    }

    /// 0-based indices in increasing order.
    pub fn iter(self) -> SubsetIter {
        SubsetIter(self.0)
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

/// Iterator over the 0-based members of a [`Subset`].
pub struct SubsetIter(u64);

impl Iterator for SubsetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for SubsetIter {}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::from_indices(iter)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Subset::from_one_based(&v, MAX_HYPOTHESES).map_err(serde::de::Error::custom)
    }
}

/// The `k`-th element (k ≥ 1) of the reflected binary Gray code walk.
///
/// Walking k = 1 .. 2^m − 1 visits every nonempty subset of `[m]` once,
/// flipping a single bit per step.
#[inline]
pub fn gray(k: u64) -> Subset {
    Subset(k ^ (k >> 1))
}

/// All nonempty subsets of `[m]` in Gray-code order.
pub fn gray_walk(m: usize) -> impl Iterator<Item = Subset> {
    assert!(m < 64);
    (1u64..(1u64 << m)).map(gray)
}

/// A family of discovery sets over `[m]`, kept sorted by bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCollection {
    pub m: usize,
    pub sets: Vec<Subset>,
}

impl SetCollection {
    pub fn new(m: usize, mut sets: Vec<Subset>) -> Self {
        sets.sort();
        sets.dedup();
        SetCollection { m, sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.sets.binary_search(&s).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subset> {
        self.sets.iter()
    }

    /// Members not strictly contained in another member.
    pub fn maximal(&self) -> Vec<Subset> {
        self.sets
            .iter()
            .copied()
            .filter(|&a| !self.sets.iter().any(|&b| a != b && a.is_subset_of(b)))
            .collect()
    }

    /// Largest cardinality among members (0 when only ∅ is present).
    pub fn max_len(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn is_superset_of(&self, other: &SetCollection) -> bool {
        other.sets.iter().all(|&s| self.contains(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_one_based() {
        assert_eq!(Subset::from_indices([0, 2]).to_string(), "{1,3}");
        assert_eq!(Subset::EMPTY.to_string(), "{}");
    }

    #[test]
    fn gray_walk_visits_each_subset_once() {
        let mut seen: Vec<u64> = gray_walk(6).map(|s| s.bits()).collect();
        assert_eq!(seen.len(), 63);
        for w in seen.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1);
        }
        seen.sort();
        assert_eq!(seen, (1..64).collect::<Vec<_>>());
    }

    #[test]
    fn serde_round_trip_uses_one_based_indices() {
        let s = Subset::from_indices([0, 4, 63]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[1,5,64]");
        let back: Subset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Subset>("[0]").is_err());
    }

    #[test]
    fn full_and_complement() {
        assert_eq!(Subset::full(64).len(), 64);
        let r = Subset::from_indices([1, 2]);
        assert_eq!(r.complement(4), Subset::from_indices([0, 3]));
        assert!(!Subset::singleton(5).fits(5));
    }

    #[test]
    fn maximal_members() {
        let c = SetCollection::new(
            3,
            vec![Subset::EMPTY, Subset::from_indices([0]), Subset::from_indices([0, 1]), Subset::from_indices([0, 2])],
        );
        assert_eq!(c.maximal(), vec![Subset::from_indices([0, 1]), Subset::from_indices([0, 2])]);
    }
}
