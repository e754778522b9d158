#![allow(dead_code)]

use eclosure_core::{Subset, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// E-values near the eBH thresholds, with zeros and occasional ties.
pub fn evalues(rng: &mut ChaCha8Rng, m: usize, alpha: f64) -> ValueVector {
    let scale = m as f64 / alpha;
    let v = (0..m)
        .map(|_| match rng.random_range(0..10) {
            0..=2 => 0.0,
            3 => (scale * 0.5).round(),
            _ => scale * rng.random::<f64>().powi(2),
        })
        .collect();
    ValueVector::evalues(v).unwrap()
}

/// A mix of uniform nulls and small signal p-values.
pub fn pvalues(rng: &mut ChaCha8Rng, m: usize) -> ValueVector {
    let v = (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            if rng.random_bool(0.5) {
                u.powi(6)
            } else {
                u
            }
        })
        .collect();
    ValueVector::pvalues(v).unwrap()
}

/// Knockoff statistics on a coarse grid so that ties occur.
pub fn knockoff(rng: &mut ChaCha8Rng, m: usize) -> ValueVector {
    let v = (0..m)
        .map(|_| {
            let shift = if rng.random_bool(0.6) { 2.0 } else { 0.0 };
            ((rng.random::<f64>() * 6.0 - 3.0 + shift) * 2.0).round() / 2.0
        })
        .collect();
    ValueVector::knockoff(v).unwrap()
}

/// Either a prefix of `order` or a uniformly random subset.
pub fn discovery_set(rng: &mut ChaCha8Rng, order: &[usize]) -> Subset {
    let m = order.len();
    if rng.random_bool(0.5) {
        Subset::prefix(order, rng.random_range(0..=m))
    } else {
        Subset::from_bits(rng.random_range(0..(1u64 << m)))
    }
}
