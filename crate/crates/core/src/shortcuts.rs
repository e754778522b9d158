//! Polynomial-time membership and largest-set searches.
//!
//! Every routine here returns the same verdict as [`Engine::member`] on the
//! matching collection. The closed-BH and closed-knockoff rules are derived
//! closed forms and cross-check themselves against brute force in debug
//! builds for `m ≤ 16`.

use crate::collections::{bh_collection, knockoff_collection, ECollection, KnockoffStats};
use crate::compare::{extended_ratio, ComparePolicy};
use crate::engine::{Engine, MembershipCertificate};
use crate::error::{check_alpha, Error, Result};
use crate::loss::{Counts, LossFunction};
use crate::procedures::bh_count;
use crate::subset::Subset;
use crate::values::{ascending_order, descending_order, ValueKind, ValueVector};

const DEBUG_CHECK_MAX_M: usize = 16;

/// Prefix sums of values in a fixed order: `s[k]` is the sum of the first `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSums {
    pub order: Vec<usize>,
    pub s: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: &[f64], order: Vec<usize>) -> Self {
        let mut s = Vec::with_capacity(order.len() + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for &i in &order {
            acc += values[i];
            s.push(acc);
        }
        PrefixSums { order, s }
    }

    /// Descending order, ties by smallest index.
    pub fn descending(values: &[f64]) -> Self {
        Self::new(values, descending_order(values))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Values of `idx` sorted ascending, with their prefix sums.
fn ascending_part(e: &[f64], idx: impl Iterator<Item = usize>) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = idx.collect();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
    let mut s = vec![0.0];
    for &i in &order {
        s.push(s.last().unwrap() + e[i]);
    }
    (order, s)
}

/// `g(a, b) = X_a + O_b − (a + b)·a/(rα)` for the mean collection, where `X_a`
/// sums the `a` smallest e-values inside `R` and `O_b` the `b` smallest
/// outside. `R ∈ closure` iff `g ≥ 0` for all `1 ≤ a ≤ r`, `0 ≤ b ≤ m − r`.
///
/// For fixed `a` this is convex in `b`.
pub fn ebhbar_g(e: &[f64], alpha: f64, r: Subset, a: usize, b: usize) -> f64 {
    let m = e.len();
    let (_, x) = ascending_part(e, r.iter());
    let (_, o) = ascending_part(e, r.complement(m).iter());
    x[a] + o[b] - (a + b) as f64 * a as f64 / (r.len() as f64 * alpha)
}

/// Membership in the closed mean (eBH-bar) collection in `O(m log m)`.
///
/// For each `a`, the `b` minimising the mean of the worst set is found by
/// binary search: adding the next outside value lowers the mean exactly when
/// it is below the current mean, and that predicate flips once.
pub fn ebhbar_member_fast(e: &ValueVector, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    ebhbar_member_with(e, alpha, r, ComparePolicy::default())
}

pub fn ebhbar_member_with(e: &ValueVector, alpha: f64, r: Subset, policy: ComparePolicy) -> Result<MembershipCertificate> {
    check_alpha(alpha)?;
    let e = e.expect(ValueKind::Evalue)?;
    let m = e.len();
    r.check_fits(m)?;
    let (xo, x) = ascending_part(e, r.iter());
    let (oo, o) = ascending_part(e, r.complement(m).iter());
    let rn = xo.len();
    let n = oo.len();
    let mut margin = if n > 0 { e[oo[0]] } else { f64::INFINITY };
    for a in 1..=rn {
        let mean = |b: usize| (x[a] + o[b]) / (a + b) as f64;
        // smallest b with b = n or o_{b+1} ≥ mean(a, b)
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if e[oo[mid]] >= mean(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let b = lo;
        let value = mean(b);
        let counts = Counts { overlap: a, null: a + b, rejected: rn };
        let gap = value - a as f64 / (rn as f64 * alpha);
        if !policy.satisfies(value, &LossFunction::Fdp, counts, alpha) {
            let witness = Subset::from_indices(xo[..a].iter().chain(&oo[..b]).copied());
            return Ok(MembershipCertificate::fail(witness, gap));
        }
        margin = margin.min(gap);
    }
    Ok(MembershipCertificate::pass(margin))
}

/// Longest member prefix of the descending e-value order.
pub fn ebhbar_largest_fast(e: &ValueVector, alpha: f64) -> Result<Subset> {
    let order = descending_order(e.expect(ValueKind::Evalue)?);
    for r in (1..=order.len()).rev() {
        let set = Subset::prefix(&order, r);
        if ebhbar_member_fast(e, alpha, set)?.member {
            return Ok(set);
        }
    }
    Ok(Subset::EMPTY)
}

/// Evaluates `e_S` along the canonical worst-case sets of a collection.
struct WorstCase<'a> {
    c: &'a ECollection,
    inside: Vec<usize>,
    outside: Vec<usize>,
    sums: Option<(Vec<f64>, Vec<f64>, bool)>,
}

impl<'a> WorstCase<'a> {
    fn new(c: &'a ECollection, r: Subset) -> Result<Self> {
        let order = c
            .worst_case_order()
            .ok_or_else(|| Error::Unsupported(format!("no worst-case order for {} collections", c.builder_name())))?;
        let inside: Vec<usize> = order.iter().copied().filter(|&i| r.contains(i)).collect();
        let outside: Vec<usize> = order.iter().copied().filter(|&i| !r.contains(i)).collect();
        let sums = c.additive_terms().map(|(t, d)| {
            let prefix = |ix: &[usize]| {
                let mut s = vec![0.0];
                for &i in ix {
                    s.push(s.last().unwrap() + t[i]);
                }
                s
            };
            (prefix(&inside), prefix(&outside), d == crate::collections::Divisor::Size)
        });
        Ok(WorstCase { c, inside, outside, sums })
    }

    fn set(&self, a: usize, b: usize) -> Subset {
        Subset::from_indices(self.inside[..a].iter().chain(&self.outside[..b]).copied())
    }

    fn eval(&self, a: usize, b: usize) -> f64 {
        match &self.sums {
            Some((x, o, by_size)) => {
                let d = if *by_size { (a + b) as f64 } else { self.c.m() as f64 };
                (x[a] + o[b]) / d
            }
            None => self.c.evaluate(self.set(a, b)),
        }
    }

    /// All `(a, b) ≠ (0, 0)`.
    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.outside.len();
        (0..=self.inside.len()).flat_map(move |a| (0..=n).map(move |b| (a, b))).skip(1)
    }
}

/// Membership by scanning the `O(m²)` canonical worst-case sets: the first
/// `a` hypotheses of the worst-case order inside `R` together with the first
/// `b` outside.
pub fn worst_case_member(
    c: &ECollection,
    loss: &LossFunction,
    alpha: f64,
    r: Subset,
    policy: ComparePolicy,
) -> Result<MembershipCertificate> {
    check_alpha(alpha)?;
    loss.validate()?;
    r.check_fits(c.m())?;
    let wc = WorstCase::new(c, r)?;
    let rn = r.len();
    let mut margin = f64::INFINITY;
    for (a, b) in wc.cells() {
        let e = wc.eval(a, b);
        let counts = Counts { overlap: a, null: a + b, rejected: rn };
        let gap = e - loss.eval_counts(counts) / alpha;
        if !policy.satisfies(e, loss, counts, alpha) {
            return Ok(MembershipCertificate::fail(wc.set(a, b), gap));
        }
        margin = margin.min(gap);
    }
    Ok(MembershipCertificate::pass(margin))
}

/// Longest member prefix of `ordering`, checked with [`worst_case_member`].
pub fn worst_case_largest(
    c: &ECollection,
    loss: &LossFunction,
    alpha: f64,
    ordering: &[usize],
    policy: ComparePolicy,
) -> Result<Subset> {
    crate::values::check_permutation(ordering, c.m())?;
    for r in (1..=ordering.len()).rev() {
        let set = Subset::prefix(ordering, r);
        if worst_case_member(c, loss, alpha, set, policy)?.member {
            return Ok(set);
        }
    }
    Ok(Subset::EMPTY)
}

/// True-discovery bound over the canonical sets.
pub fn worst_case_true_discovery_bound(c: &ECollection, alpha: f64, r: Subset, policy: ComparePolicy) -> Result<usize> {
    check_alpha(alpha)?;
    r.check_fits(c.m())?;
    let wc = WorstCase::new(c, r)?;
    let fwer = LossFunction::fwer();
    let unit = Counts { overlap: 1, null: 1, rejected: 1 };
    let rn = r.len();
    Ok(wc
        .cells()
        .filter(|&(a, b)| !policy.satisfies(wc.eval(a, b), &fwer, unit, alpha))
        .map(|(a, _)| rn - a)
        .min()
        .unwrap_or(rn))
}

/// Critical level over the canonical sets.
pub fn worst_case_critical_alpha(c: &ECollection, loss: &LossFunction, r: Subset) -> Result<f64> {
    if !c.flags().alpha_independent {
        return Err(Error::AlphaDependent(c.builder_name().into()));
    }
    loss.validate()?;
    r.check_fits(c.m())?;
    let wc = WorstCase::new(c, r)?;
    let rn = r.len();
    Ok(wc
        .cells()
        .map(|(a, b)| {
            let counts = Counts { overlap: a, null: a + b, rejected: rn };
            extended_ratio(loss.eval_counts(counts), wc.eval(a, b))
        })
        .fold(0.0, f64::max))
}

/// Membership through the canonical scan when the collection admits one,
/// otherwise through the engine.
pub fn member_auto(engine: &Engine, c: &ECollection, loss: &LossFunction, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    if c.worst_case_order().is_some() {
        worst_case_member(c, loss, alpha, r, engine.policy)
    } else {
        engine.member(c, loss, alpha, r)
    }
}

pub fn true_discovery_bound_auto(engine: &Engine, c: &ECollection, alpha: f64, r: Subset) -> Result<usize> {
    if c.worst_case_order().is_some() {
        worst_case_true_discovery_bound(c, alpha, r, engine.policy)
    } else {
        engine.true_discovery_bound(c, alpha, r)
    }
}

pub fn critical_alpha_auto(engine: &Engine, c: &ECollection, loss: &LossFunction, r: Subset) -> Result<f64> {
    if c.worst_case_order().is_some() {
        worst_case_critical_alpha(c, loss, r)
    } else {
        engine.critical_alpha(c, loss, r)
    }
}

fn require_monotone(c: &ECollection) -> Result<&[f64]> {
    if !c.flags().monotone_in_p {
        return Err(Error::Unsupported(format!("{} collection is not monotone in p", c.builder_name())));
    }
    c.p_values()
        .ok_or_else(|| Error::Unsupported(format!("{} collection carries no p-values", c.builder_name())))
}

/// FDR membership for a p-monotone collection (BY, Su): the canonical sets
/// are the `a` largest p-values inside `R` and the `b` largest outside.
pub fn monotone_member_fast(c: &ECollection, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    require_monotone(c)?;
    worst_case_member(c, &LossFunction::Fdp, alpha, r, ComparePolicy::default())
}

/// Longest member prefix of the ascending p-value order.
pub fn monotone_largest(c: &ECollection, alpha: f64) -> Result<Subset> {
    let p = require_monotone(c)?;
    worst_case_largest(c, &LossFunction::Fdp, alpha, &ascending_order(p), ComparePolicy::default())
}

#[track_caller]
fn debug_cross_check(c: &ECollection, alpha: f64, r: Subset, rule: &MembershipCertificate, name: &str) {
    if cfg!(debug_assertions) && c.m() <= DEBUG_CHECK_MAX_M {
        let brute = Engine::default()
            .member(c, &LossFunction::Fdp, alpha, r)
            .expect("brute-force check within caps");
        assert_eq!(
            brute.member, rule.member,
            "{name} rule disagrees with brute force for R = {r} at alpha = {alpha}"
        );
    }
}

/// Derived closed form for the closed BH collection:
/// `R` is a member iff `R = ∅`, or `R ⊆ R^BH` and `m|R| ≥ r(|R| + z)` with
/// `r = |R^BH|` and `z = m − r`.
pub fn closedbh_member_rule(p: &ValueVector, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    check_alpha(alpha)?;
    let pv = p.expect(ValueKind::Pvalue)?;
    let m = pv.len();
    r.check_fits(m)?;
    let rb = bh_count(pv, alpha / m as f64);
    let order = ascending_order(pv);
    let bh_set = Subset::prefix(&order, rb);
    let z = m - rb;
    let v = m as f64 / (alpha * rb.max(1) as f64);
    let k = r.len();
    let cert = if k == 0 {
        let margin = if z > 0 { 0.0 } else { v };
        MembershipCertificate::pass(margin)
    } else if let Some(i) = r.difference(bh_set).iter().next() {
        MembershipCertificate::fail(Subset::singleton(i), -1.0 / (k as f64 * alpha))
    } else {
        let gap = |a: usize| a as f64 * (v / (a + z) as f64 - 1.0 / (k as f64 * alpha));
        let mut margin = (1..=k).map(gap).fold(f64::INFINITY, f64::min);
        if z > 0 {
            margin = margin.min(0.0);
        } else if rb > k {
            margin = margin.min(v);
        }
        if m * k >= rb * (k + z) {
            MembershipCertificate::pass(margin)
        } else {
            MembershipCertificate::fail(r.union(bh_set.complement(m)), gap(k))
        }
    };
    if cfg!(debug_assertions) && m <= DEBUG_CHECK_MAX_M {
        debug_cross_check(&bh_collection(p, alpha)?, alpha, r, &cert, "closed-BH");
    }
    Ok(cert)
}

/// Derived closed form for the closed knockoff collection:
/// `R` is a member iff `R = ∅`, or `R ⊆ R^Kn` and `α|R| ≥ 1 + f_neg` with
/// `f_neg = #{i : w_i ≤ −c_α}`.
pub fn closedknockoff_member_rule(w: &ValueVector, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    check_alpha(alpha)?;
    let wv = w.expect(ValueKind::KnockoffStat)?;
    let m = wv.len();
    r.check_fits(m)?;
    let st = KnockoffStats::new(wv, alpha);
    let pos = st.positive;
    let neg_den = 1.0 + st.f_neg as f64;
    let k = r.len();
    // smallest e_S over nonempty S outside R
    let outside = r.complement(m);
    let zero_floor = if outside.is_empty() {
        f64::INFINITY
    } else if outside.is_subset_of(pos) {
        1.0
    } else {
        0.0
    };
    let cert = if k == 0 {
        MembershipCertificate::pass(zero_floor)
    } else if let Some(i) = r.difference(pos).iter().next() {
        MembershipCertificate::fail(Subset::singleton(i), -1.0 / (k as f64 * alpha))
    } else {
        let gap = |a: usize| a as f64 * (1.0 / neg_den - 1.0 / (k as f64 * alpha));
        let margin = gap(1).min(gap(k)).min(zero_floor);
        if ComparePolicy::default().ge(alpha * k as f64, neg_den) {
            MembershipCertificate::pass(margin)
        } else {
            MembershipCertificate::fail(r.union(st.negative), gap(k))
        }
    };
    if cfg!(debug_assertions) && m <= DEBUG_CHECK_MAX_M {
        debug_cross_check(&knockoff_collection(w, alpha)?, alpha, r, &cert, "closed-knockoff");
    }
    Ok(cert)
}

/// `{i : (e_i + Σ of the k smallest other e-values)/(k + 1) ≥ 1/α for all
/// k < m}`, the FWER closure of the mean collection, in `O(m log m)`.
pub fn eholm_fast(e: &[f64], alpha: f64) -> Subset {
    let policy = ComparePolicy::default();
    let m = e.len();
    if m == 0 {
        return Subset::EMPTY;
    }
    let order = ascending_order(e);
    let x: Vec<f64> = order.iter().map(|&i| e[i]).collect();
    let mut p = vec![0.0; m + 1];
    for j in 0..m {
        p[j + 1] = p[j] + x[j];
    }
    let level = 1.0 / alpha;
    let ok_mean = |sum: f64, n: usize| policy.ge(sum / n as f64, level);
    // suffix[t]: P(j) ≥ j/α for every j in t+1..=m
    let mut suffix = vec![true; m + 1];
    for t in (0..m).rev() {
        suffix[t] = suffix[t + 1] && ok_mean(p[t + 1], t + 1);
    }
    // prefix arg max of (k + 1)/α − P(k) over k < t
    let mut out = Subset::EMPTY;
    let mut best_k: Option<usize> = None;
    for t in 0..m {
        let head_ok = match best_k {
            None => true,
            Some(k) => ok_mean(x[t] + p[k], k + 1),
        };
        if head_ok && suffix[t] {
            out = out.with(order[t]);
        }
        let cand = (t + 1) as f64 * level - p[t];
        let better = match best_k {
            None => true,
            Some(k) => cand > (k + 1) as f64 * level - p[k],
        };
        if better {
            best_k = Some(t);
        }
    }
    out
}

/// The smallest descending e-value profile for which the top `k` form a
/// member of the closed mean collection, chosen greedily from rank `k` up;
/// ranks below `k` are 0.
pub fn greedy_boundary_ebh(k: usize, m: usize, alpha: f64) -> Result<ValueVector> {
    check_alpha(alpha)?;
    if k == 0 || k > m {
        return Err(Error::Domain(format!("need 1 ≤ k ≤ m, got k = {k}, m = {m}")));
    }
    let mut e = vec![0.0; m];
    let z = (m - k) as f64;
    let kf = k as f64;
    for j in (1..=k).rev() {
        let mut need: f64 = if j < k { e[j] } else { 0.0 };
        let mut below = 0.0;
        for a in 1..=(k - j + 1) {
            if a > 1 {
                below += e[k - a + 1];
            }
            let af = a as f64;
            need = need.max((af + z) * af / (kf * alpha) - below);
        }
        e[j - 1] = need;
    }
    ValueVector::evalues(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collections::{by_collection, mean_collection, su_collection};
    use crate::calibrators::SuConstants;

    fn s(ix: &[usize]) -> Subset {
        Subset::from_one_based(ix, 64).unwrap()
    }

    fn ev(v: Vec<f64>) -> ValueVector {
        ValueVector::evalues(v).unwrap()
    }

    #[test]
    fn ebhbar_examples() {
        let a = 0.05;
        let e = ev((1..=20).map(|i| 41.0 - 2.0 * i as f64).collect());
        assert!(ebhbar_member_fast(&e, a, Subset::full(20)).unwrap().member);
        assert_eq!(ebhbar_largest_fast(&e, a).unwrap(), Subset::full(20));
        let m = 7;
        let mut v = vec![0.0; m];
        v[0] = (m as f64 - 0.5) / a;
        v[1] = 0.5 / a;
        let e = ev(v);
        assert!(ebhbar_member_fast(&e, a, s(&[1])).unwrap().member);
        assert!(!ebhbar_member_fast(&e, a, s(&[1, 2])).unwrap().member);
        let e = ev(vec![60.0, 20.0, 20.0, 0.0, 0.0]);
        assert_eq!(ebhbar_largest_fast(&e, a).unwrap(), s(&[1]));
        let e = ev(vec![5.0 / a; 5]);
        assert_eq!(ebhbar_largest_fast(&e, a).unwrap(), Subset::full(5));
    }

    #[test]
    fn ebhbar_margin_matches_engine() {
        let a = 0.1;
        let e = ev(vec![30.0, 10.0, 0.0, 4.0, 17.0]);
        let c = mean_collection(&e).unwrap();
        for bits in 0..32u64 {
            let r = Subset::from_bits(bits);
            let fast = ebhbar_member_fast(&e, a, r).unwrap();
            let slow = Engine::default().member(&c, &LossFunction::Fdp, a, r).unwrap();
            assert_eq!(fast.member, slow.member, "{r}");
            if fast.member {
                assert!((fast.margin - slow.margin).abs() < 1e-9, "{r}: {} vs {}", fast.margin, slow.margin);
            }
        }
    }

    #[test]
    fn g_matches_worst_mean() {
        let e = vec![30.0, 10.0, 0.0, 4.0, 17.0];
        let r = s(&[1, 2, 5]);
        // a = 1 takes 10, b = 2 takes 0 and 4
        let g = ebhbar_g(&e, 0.1, r, 1, 2);
        assert!((g - (14.0 - 3.0 / 0.3)).abs() < 1e-12);
    }

    #[test]
    fn monotone_examples() {
        let a = 0.05;
        let p = ValueVector::pvalues(vec![0.012, 0.018, 0.024, 0.027]).unwrap();
        let c = by_collection(&p, a).unwrap();
        assert!(monotone_member_fast(&c, a, Subset::full(4)).unwrap().member);
        assert_eq!(monotone_largest(&c, a).unwrap(), Subset::full(4));

        let su = SuConstants::new(a).unwrap();
        let p = ValueVector::pvalues(vec![a / (3.0 * su.ell), 3.0 * a / (2.0 * su.ell), 3.0 * a / (2.0 * su.ell)]).unwrap();
        let c = su_collection(&p, a).unwrap();
        let cert = monotone_member_fast(&c, a, Subset::full(3)).unwrap();
        assert!(cert.member);
        assert!(cert.margin.abs() < 1e-9);
        assert_eq!(monotone_largest(&c, a).unwrap(), Subset::full(3));

        let p = ValueVector::pvalues(vec![1.0; 4]).unwrap();
        assert_eq!(monotone_largest(&by_collection(&p, a).unwrap(), a).unwrap(), Subset::EMPTY);
        let mean = mean_collection(&ev(vec![1.0])).unwrap();
        assert!(monotone_member_fast(&mean, a, Subset::EMPTY).is_err());
    }

    #[test]
    fn closedbh_examples() {
        let p = ValueVector::pvalues(vec![
            0.0001, 0.013, 0.019, 0.021, 0.044, 0.052, 0.074, 0.124, 0.486, 0.661, 0.848,
        ])
        .unwrap();
        for bits in 0..(1u64 << 11) {
            let r = Subset::from_bits(bits);
            let member = closedbh_member_rule(&p, 0.2, r).unwrap().member;
            assert_eq!(member, r.is_empty() || r == Subset::full(8), "{r}");
        }
        let p = ValueVector::pvalues(vec![0.001, 0.002, 0.003]).unwrap();
        assert!((0..8).all(|b| closedbh_member_rule(&p, 0.1, Subset::from_bits(b)).unwrap().member));
        let p = ValueVector::pvalues(vec![0.001, 0.9]).unwrap();
        let cert = closedbh_member_rule(&p, 0.1, s(&[2])).unwrap();
        assert_eq!(cert.witness, Some(s(&[2])));
    }

    #[test]
    fn closedknockoff_examples() {
        let w = ValueVector::knockoff(vec![6.0, 5.0, 4.0, 3.0, -2.0, -1.0]).unwrap();
        for bits in 0..64u64 {
            let r = Subset::from_bits(bits);
            let member = closedknockoff_member_rule(&w, 0.4, r).unwrap().member;
            let expect = r.is_empty() || (r.is_subset_of(Subset::full(4)) && r.len() >= 3);
            assert_eq!(member, expect, "{r}");
        }
        let cert = closedknockoff_member_rule(&w, 0.4, s(&[1, 2])).unwrap();
        assert!(!cert.member);
    }

    #[test]
    fn eholm_examples() {
        assert_eq!(eholm_fast(&[30.0, 10.0, 0.0], 0.1), s(&[1]));
        assert_eq!(eholm_fast(&[30.0; 3], 0.1), Subset::full(3));
        assert_eq!(eholm_fast(&[0.0; 3], 0.1), Subset::EMPTY);
    }

    #[test]
    fn greedy_boundary_examples() {
        let e = greedy_boundary_ebh(20, 20, 0.05).unwrap();
        for (i, &v) in e.values().iter().enumerate() {
            assert!((v - (39.0 - 2.0 * i as f64)).abs() < 1e-9);
        }
        let e = greedy_boundary_ebh(7, 20, 0.05).unwrap();
        assert!((e.values()[6] - 40.0).abs() < 1e-9);
        assert!((e.values()[5] - 45.714).abs() < 1e-3);
        assert!(e.values()[7..].iter().all(|&v| v == 0.0));
        assert!(greedy_boundary_ebh(0, 5, 0.05).is_err());
        assert!(greedy_boundary_ebh(6, 5, 0.05).is_err());
    }

    #[test]
    fn greedy_boundary_is_tight() {
        let (k, m, a) = (5, 8, 0.1);
        let e = greedy_boundary_ebh(k, m, a).unwrap();
        let top = Subset::full(k);
        assert!(ebhbar_member_fast(&e, a, top).unwrap().member);
        for i in 0..k {
            let mut v = e.values().to_vec();
            v[i] -= 1e-6 * v[i].max(1.0);
            assert!(!ebhbar_member_fast(&ev(v), a, top).unwrap().member, "coordinate {i}");
        }
    }
}
