//! Exhaustive closure machinery: the reference semantics every shortcut is
//! checked against.
//!
//! `R` belongs to the closed collection for loss `f` at level α iff
//! `e_S ≥ f_S(R)/α` for every nonempty feasible `S ⊆ [m]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collections::{Divisor, ECollection, Source};
use crate::compare::{extended_ratio, ComparePolicy};
use crate::error::{check_alpha, Error, Result};
use crate::loss::{Counts, LossFunction};
use crate::subset::{gray, SetCollection, Subset};
use crate::values::check_permutation;

/// Default largest `m` for exhaustive membership (2^m evaluations).
pub const DEFAULT_MEMBER_CAP: usize = 24;
/// Default largest `m` for enumerating a whole closed collection.
pub const DEFAULT_ENUMERATE_CAP: usize = 20;
/// Environment variable overriding both caps.
pub const ENUM_CAP_ENV: &str = "ECLOSURE_ENUM_CAP";

const PARALLEL_MIN_M: usize = 16;

/// Result of a membership check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub member: bool,
    /// A set `S` with `e_S < f_S(R)/α`, present iff `member` is false.
    pub witness: Option<Subset>,
    /// `min_S e_S − f_S(R)/α` over the sets examined; for non-members the
    /// value at the witness.
    #[serde(with = "crate::serde_ext::real")]
    pub margin: f64,
}

impl MembershipCertificate {
    pub(crate) fn pass(margin: f64) -> Self {
        MembershipCertificate { member: true, witness: None, margin }
    }

    pub(crate) fn fail(witness: Subset, margin: f64) -> Self {
        MembershipCertificate { member: false, witness: Some(witness), margin }
    }
}

/// One post hoc selection: a loss, a level and a discovery set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    pub loss: LossFunction,
    pub alpha: f64,
    pub set: Subset,
}

/// An audited selection with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditedStep {
    #[serde(flatten)]
    pub step: AuditStep,
    pub certificate: MembershipCertificate,
}

/// The outcome of checking several post hoc selections against one
/// e-collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostHocAudit {
    pub steps: Vec<AuditedStep>,
    pub collection_fingerprint: String,
    pub passed: bool,
}

/// Brute-force closure engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub policy: ComparePolicy,
    pub member_cap: usize,
    pub enumerate_cap: usize,
    pub parallel: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            policy: ComparePolicy::default(),
            member_cap: DEFAULT_MEMBER_CAP,
            enumerate_cap: DEFAULT_ENUMERATE_CAP,
            parallel: true,
        }
    }
}

/// Precomputed fast paths for evaluating `e_S` over many `S`.
pub(crate) struct Evaluator<'a> {
    c: &'a ECollection,
    fast: Fast,
}

enum Fast {
    /// Sum split into a low-bit and a high-bit table, so that each `e_S` costs
    /// two lookups and carries the rounding of at most `m` additions.
    Sum { lo: Vec<f64>, hi: Vec<f64>, low_bits: u32, divisor: Divisor, m: f64 },
    Knockoff { pos: u64, neg: u64 },
    Generic,
}

fn subset_sums(v: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; 1usize << v.len()];
    for mask in 1..t.len() {
        let low = mask.trailing_zeros() as usize;
        t[mask] = t[mask & (mask - 1)] + v[low];
    }
    t
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(c: &'a ECollection) -> Self {
        let m = c.m();
        let fast = if let Some((terms, divisor)) = c.additive_terms().filter(|_| m <= 40) {
            let low_bits = m.min(12).max(m.saturating_sub(20)) as u32;
            let (lo, hi) = terms.split_at(low_bits as usize);
            Fast::Sum { lo: subset_sums(lo), hi: subset_sums(hi), low_bits, divisor, m: m as f64 }
        } else if let Source::Knockoff { stats, .. } = c.source() {
            Fast::Knockoff { pos: stats.positive.bits(), neg: stats.negative.bits() }
        } else {
            Fast::Generic
        };
        Evaluator { c, fast }
    }

    /// `e_S` ignoring feasibility.
    #[inline]
    pub(crate) fn eval(&self, s: Subset) -> f64 {
        match &self.fast {
            Fast::Sum { lo, hi, low_bits, divisor, m } => {
                let bits = s.bits();
                let sum = lo[(bits & ((1u64 << low_bits) - 1)) as usize] + hi[(bits >> low_bits) as usize];
                match divisor {
                    Divisor::Size => sum / s.len() as f64,
                    Divisor::M => sum / m,
                }
            }
            Fast::Knockoff { pos, neg } => {
                let p = (s.bits() & pos).count_ones() as f64;
                let n = (s.bits() & neg).count_ones() as f64;
                p / (1.0 + n)
            }
            Fast::Generic => self.c.evaluate_unrestricted(s),
        }
    }

    #[inline]
    pub(crate) fn feasible(&self, s: Subset) -> bool {
        self.c.is_feasible(s)
    }
}

/// Iterates the masks with `k` bits set among the low `m` bits, increasing.
fn masks_of_size(m: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(0);
        return out;
    }
    if k > m {
        return out;
    }
    let limit = 1u64 << m;
    let mut x = (1u64 << k) - 1;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

impl Engine {
    /// The default engine with caps overridden by `ECLOSURE_ENUM_CAP`.
    pub fn from_env() -> Self {
        let mut e = Engine::default();
        if let Some(cap) = std::env::var(ENUM_CAP_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            let cap = cap.min(40);
            e.member_cap = cap;
            e.enumerate_cap = cap;
        }
        e
    }

    pub fn with_policy(policy: ComparePolicy) -> Self {
        Engine { policy, ..Engine::default() }
    }

    fn check_cap(m: usize, cap: usize) -> Result<()> {
        if m > cap {
            Err(Error::CapExceeded { m, cap })
        } else {
            Ok(())
        }
    }

    /// Exhaustive membership check.
    pub fn member(&self, c: &ECollection, loss: &LossFunction, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
        check_alpha(alpha)?;
        loss.validate()?;
        let m = c.m();
        r.check_fits(m)?;
        Self::check_cap(m, self.member_cap)?;
        let ev = Evaluator::new(c);
        let rn = r.len();
        let policy = self.policy;
        let check = |s: Subset| -> (bool, f64) {
            let e = ev.eval(s);
            let counts = Counts { overlap: s.intersection(r).len(), null: s.len(), rejected: rn };
            let ok = policy.satisfies(e, loss, counts, alpha);
            (ok, e - loss.eval_counts(counts) / alpha)
        };
        let n = 1u64 << m;
        if self.parallel && m >= PARALLEL_MIN_M {
            let first = (1..n).into_par_iter().find_first(|&k| {
                let s = gray(k);
                ev.feasible(s) && !check(s).0
            });
            if let Some(k) = first {
                let s = gray(k);
                return Ok(MembershipCertificate::fail(s, check(s).1));
            }
            let margin = (1..n)
                .into_par_iter()
                .map(gray)
                .filter(|&s| ev.feasible(s))
                .map(|s| check(s).1)
                .reduce(|| f64::INFINITY, f64::min);
            return Ok(MembershipCertificate::pass(margin));
        }
        let mut margin = f64::INFINITY;
        for k in 1..n {
            let s = gray(k);
            if !ev.feasible(s) {
                continue;
            }
            let (ok, gap) = check(s);
            if !ok {
                return Ok(MembershipCertificate::fail(s, gap));
            }
            margin = margin.min(gap);
        }
        Ok(MembershipCertificate::pass(margin))
    }

    /// Feasible sets that could violate some condition, with their `e_S`,
    /// sorted by increasing `e_S`.
    fn candidates(&self, c: &ECollection, loss: &LossFunction, alpha: f64) -> Vec<(u64, f64)> {
        let ev = Evaluator::new(c);
        let n = 1u64 << c.m();
        let ceiling = loss.upper_bound(c.m()) / alpha * (1.0 + 1e-9);
        let mut v: Vec<(u64, f64)> = (1..n)
            .into_par_iter()
            .filter_map(|k| {
                let s = gray(k);
                if !ev.feasible(s) {
                    return None;
                }
                let e = ev.eval(s);
                (e < ceiling).then_some((s.bits(), e))
            })
            .collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        v
    }

    fn passes(&self, cands: &[(u64, f64)], loss: &LossFunction, alpha: f64, r: Subset) -> bool {
        let rn = r.len();
        cands.iter().all(|&(bits, e)| {
            let s = Subset::from_bits(bits);
            let counts = Counts { overlap: s.intersection(r).len(), null: s.len(), rejected: rn };
            self.policy.satisfies(e, loss, counts, alpha)
        })
    }

    /// Every member of the closed collection.
    pub fn enumerate_collection(&self, c: &ECollection, loss: &LossFunction, alpha: f64) -> Result<SetCollection> {
        check_alpha(alpha)?;
        loss.validate()?;
        let m = c.m();
        Self::check_cap(m, self.enumerate_cap)?;
        let cands = self.candidates(c, loss, alpha);
        let members: Vec<Subset> = (0..1u64 << m)
            .into_par_iter()
            .map(Subset::from_bits)
            .filter(|&r| self.passes(&cands, loss, alpha, r))
            .collect();
        Ok(SetCollection::new(m, members))
    }

    /// Longest member prefix of `ordering`; with `exhaustive`, a member of
    /// maximum cardinality (ties: smallest bitmask).
    pub fn largest_member(
        &self,
        c: &ECollection,
        loss: &LossFunction,
        alpha: f64,
        ordering: &[usize],
        exhaustive: bool,
    ) -> Result<Subset> {
        check_alpha(alpha)?;
        loss.validate()?;
        let m = c.m();
        check_permutation(ordering, m)?;
        if exhaustive {
            Self::check_cap(m, self.enumerate_cap)?;
            let cands = self.candidates(c, loss, alpha);
            for k in (1..=m).rev() {
                let masks = masks_of_size(m, k);
                let found = masks
                    .par_iter()
                    .find_first(|&&bits| self.passes(&cands, loss, alpha, Subset::from_bits(bits)));
                if let Some(&bits) = found {
                    return Ok(Subset::from_bits(bits));
                }
            }
            return Ok(Subset::EMPTY);
        }
        for r in (1..=m).rev() {
            let set = Subset::prefix(ordering, r);
            if self.member(c, loss, alpha, set)?.member {
                return Ok(set);
            }
        }
        Ok(Subset::EMPTY)
    }

    /// `min{|R \ S| : S feasible, e_S < 1/α}`, or `|R|` when no such `S`.
    pub fn true_discovery_bound(&self, c: &ECollection, alpha: f64, r: Subset) -> Result<usize> {
        check_alpha(alpha)?;
        let m = c.m();
        r.check_fits(m)?;
        Self::check_cap(m, self.member_cap)?;
        let ev = Evaluator::new(c);
        let policy = self.policy;
        let fwer = LossFunction::fwer();
        let unit = Counts { overlap: 1, null: 1, rejected: 1 };
        let bound = (1..1u64 << m)
            .into_par_iter()
            .map(gray)
            .filter(|&s| ev.feasible(s) && !policy.satisfies(ev.eval(s), &fwer, unit, alpha))
            .map(|s| r.difference(s).len())
            .min()
            .unwrap_or(r.len());
        Ok(bound.min(r.len()))
    }

    /// `max_S f_S(R)/e_S` with `0/0 = 0` and `x/0 = +∞`: the smallest level at
    /// which `R` is a member. Only for α-independent collections.
    pub fn critical_alpha(&self, c: &ECollection, loss: &LossFunction, r: Subset) -> Result<f64> {
        if !c.flags().alpha_independent {
            return Err(Error::AlphaDependent(c.builder_name().into()));
        }
        loss.validate()?;
        let m = c.m();
        r.check_fits(m)?;
        Self::check_cap(m, self.member_cap)?;
        let ev = Evaluator::new(c);
        let rn = r.len();
        let worst = (1..1u64 << m)
            .into_par_iter()
            .map(gray)
            .filter(|&s| ev.feasible(s))
            .map(|s| {
                let counts = Counts { overlap: s.intersection(r).len(), null: s.len(), rejected: rn };
                extended_ratio(loss.eval_counts(counts), ev.eval(s))
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    }

    /// `{i : {i} is a member under FDP}`.
    pub fn fwer_reject_set(&self, c: &ECollection, alpha: f64) -> Result<Subset> {
        check_alpha(alpha)?;
        let m = c.m();
        if m > self.member_cap {
            return match c.base_values() {
                Some(e) if !c.is_restricted() => Ok(crate::shortcuts::eholm_fast(e, alpha)),
                _ => Err(Error::CapExceeded { m, cap: self.member_cap }),
            };
        }
        let mut out = Subset::EMPTY;
        for i in 0..m {
            if self.member(c, &LossFunction::Fdp, alpha, Subset::singleton(i))?.member {
                out = out.with(i);
            }
        }
        Ok(out)
    }

    /// Checks a list of post hoc selections against one collection.
    pub fn audit_post_hoc(&self, c: &ECollection, steps: &[AuditStep]) -> Result<PostHocAudit> {
        audit_post_hoc_with(c, steps, |loss, alpha, r| self.member(c, loss, alpha, r))
    }
}

/// Audits `steps` using `verify` for the individual membership checks.
pub fn audit_post_hoc_with<F>(c: &ECollection, steps: &[AuditStep], mut verify: F) -> Result<PostHocAudit>
where
    F: FnMut(&LossFunction, f64, Subset) -> Result<MembershipCertificate>,
{
    if let Some(first) = steps.first() {
        let mixed = steps.iter().any(|s| s.alpha != first.alpha);
        if mixed && !c.flags().alpha_independent {
            return Err(Error::AlphaDependent(format!(
                "{} collection audited at several levels",
                c.builder_name()
            )));
        }
    }
    let mut out = Vec::with_capacity(steps.len());
    for step in steps {
        let certificate = verify(&step.loss, step.alpha, step.set)?;
        out.push(AuditedStep { step: step.clone(), certificate });
    }
    let passed = out.iter().all(|s| s.certificate.member);
    Ok(PostHocAudit { steps: out, collection_fingerprint: c.fingerprint(), passed })
}

pub fn member(c: &ECollection, loss: &LossFunction, alpha: f64, r: Subset) -> Result<MembershipCertificate> {
    Engine::default().member(c, loss, alpha, r)
}

pub fn enumerate_collection(c: &ECollection, loss: &LossFunction, alpha: f64) -> Result<SetCollection> {
    Engine::default().enumerate_collection(c, loss, alpha)
}

pub fn largest_member(c: &ECollection, loss: &LossFunction, alpha: f64, ordering: &[usize]) -> Result<Subset> {
    Engine::default().largest_member(c, loss, alpha, ordering, false)
}

pub fn true_discovery_bound(c: &ECollection, alpha: f64, r: Subset) -> Result<usize> {
    Engine::default().true_discovery_bound(c, alpha, r)
}

pub fn critical_alpha(c: &ECollection, loss: &LossFunction, r: Subset) -> Result<f64> {
    Engine::default().critical_alpha(c, loss, r)
}

pub fn fwer_reject_set(c: &ECollection, alpha: f64) -> Result<Subset> {
    Engine::default().fwer_reject_set(c, alpha)
}

pub fn audit_post_hoc(c: &ECollection, steps: &[AuditStep]) -> Result<PostHocAudit> {
    Engine::default().audit_post_hoc(c, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collections::mean_collection;
    use crate::values::{descending_order, ValueVector};

    fn s(ix: &[usize]) -> Subset {
        Subset::from_one_based(ix, 64).unwrap()
    }

    fn mean(e: Vec<f64>) -> ECollection {
        mean_collection(&ValueVector::evalues(e).unwrap()).unwrap()
    }

    #[test]
    fn masks_of_size_are_complete() {
        assert_eq!(masks_of_size(5, 2).len(), 10);
        assert_eq!(masks_of_size(5, 5), vec![31]);
        assert_eq!(masks_of_size(3, 4), Vec::<u64>::new());
        assert!(masks_of_size(6, 3).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn evaluator_matches_collection() {
        let c = mean((0..15).map(|i| (i * 7 % 11) as f64 + 0.25).collect());
        let ev = Evaluator::new(&c);
        for k in 1..(1u64 << 15) {
            let t = gray(k);
            assert!((ev.eval(t) - c.evaluate(t)).abs() <= 1e-12 * c.evaluate(t));
        }
    }

    #[test]
    fn member_examples() {
        let a = 0.05;
        // (3/(2α), 1/(2α)) = (30, 10): {1,2} is a member, {2} is not
        let c = mean(vec![30.0, 10.0]);
        assert!(member(&c, &LossFunction::Fdp, a, s(&[1, 2])).unwrap().member);
        let cert = member(&c, &LossFunction::Fdp, a, s(&[2])).unwrap();
        assert!(!cert.member);
        assert_eq!(cert.witness, Some(s(&[2])));
        assert!(member(&c, &LossFunction::Fdp, a, Subset::EMPTY).unwrap().member);
    }

    #[test]
    fn witness_violates_and_is_first_in_gray_order() {
        let c = mean(vec![40.0, 10.0, 10.0]);
        let cert = member(&c, &LossFunction::Fdp, 0.05, s(&[1, 2, 3])).unwrap();
        let w = cert.witness.unwrap();
        assert!(c.evaluate(w) < LossFunction::Fdp.eval(w, s(&[1, 2, 3])) / 0.05);
        let first = (1..8u64).map(gray).find(|&t| {
            c.evaluate(t) < LossFunction::Fdp.eval(t, s(&[1, 2, 3])) / 0.05
        });
        assert_eq!(Some(w), first);
    }

    #[test]
    fn enumerate_examples() {
        let a = 0.05;
        let c = mean(vec![2.0 / a, 0.5 / a, 0.5 / a]);
        let all = enumerate_collection(&c, &LossFunction::Fdp, a).unwrap();
        assert_eq!(all.maximal(), vec![s(&[1, 2]), s(&[1, 3])]);
        assert!(!all.contains(s(&[1, 2, 3])));
        let c = mean(vec![1.8 / a, 0.0]);
        assert_eq!(enumerate_collection(&c, &LossFunction::Fdp, a).unwrap().sets, vec![Subset::EMPTY]);
        let c = mean(vec![1.8 / a, 0.2 / a]);
        assert_eq!(enumerate_collection(&c, &LossFunction::Fdp, a).unwrap().sets, vec![Subset::EMPTY, s(&[1])]);
        let c = mean(vec![0.0; 4]);
        assert_eq!(enumerate_collection(&c, &LossFunction::Fdp, a).unwrap().sets, vec![Subset::EMPTY]);
    }

    #[test]
    fn largest_examples() {
        let a = 0.05;
        let e: Vec<f64> = (1..=20).map(|i| 41.0 - 2.0 * i as f64).collect();
        let c = mean(e.clone());
        assert_eq!(largest_member(&c, &LossFunction::Fdp, a, &descending_order(&e)).unwrap(), Subset::full(20));
        let m = 6;
        let mut e = vec![0.0; m];
        e[0] = (m as f64 - 0.5) / a;
        e[1] = 0.5 / a;
        let c = mean(e.clone());
        assert_eq!(largest_member(&c, &LossFunction::Fdp, a, &descending_order(&e)).unwrap(), s(&[1]));
        let c = mean(vec![0.0; 5]);
        assert_eq!(largest_member(&c, &LossFunction::Fdp, a, &[0, 1, 2, 3, 4]).unwrap(), Subset::EMPTY);
    }

    #[test]
    fn exhaustive_largest_can_beat_prefix() {
        let a = 0.05;
        let c = mean(vec![2.0 / a, 0.5 / a, 0.5 / a]);
        let eng = Engine::default();
        let got = eng.largest_member(&c, &LossFunction::Fdp, a, &[0, 1, 2], true).unwrap();
        assert_eq!(got, s(&[1, 2]));
    }

    #[test]
    fn true_discovery_bound_examples() {
        let c = mean(vec![30.0, 10.0, 0.0]);
        assert_eq!(true_discovery_bound(&c, 0.1, s(&[1, 2])).unwrap(), 1);
        let c = mean(vec![50.0, 40.0]);
        assert_eq!(true_discovery_bound(&c, 0.1, s(&[1, 2])).unwrap(), 2);
    }

    #[test]
    fn critical_alpha_examples() {
        let c = mean(vec![30.0, 10.0, 0.0]);
        let v = critical_alpha(&c, &LossFunction::Fdp, s(&[1])).unwrap();
        assert!((v - 0.075).abs() < 1e-15);
        assert_eq!(critical_alpha(&c, &LossFunction::Fdp, Subset::EMPTY).unwrap(), 0.0);
        assert_eq!(critical_alpha(&c, &LossFunction::Fdp, s(&[1, 3])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn critical_alpha_refuses_alpha_dependent() {
        let p = ValueVector::pvalues(vec![0.01, 0.02]).unwrap();
        let c = crate::collections::by_collection(&p, 0.05).unwrap();
        assert!(matches!(critical_alpha(&c, &LossFunction::Fdp, s(&[1])), Err(Error::AlphaDependent(_))));
    }

    #[test]
    fn fwer_examples() {
        assert_eq!(fwer_reject_set(&mean(vec![30.0, 10.0, 0.0]), 0.1).unwrap(), s(&[1]));
        assert_eq!(fwer_reject_set(&mean(vec![40.0; 4]), 0.1).unwrap(), Subset::full(4));
        assert_eq!(fwer_reject_set(&mean(vec![0.0; 4]), 0.1).unwrap(), Subset::EMPTY);
    }

    #[test]
    fn audit_examples() {
        let c = mean(vec![30.0, 10.0, 0.0]);
        let steps = vec![
            AuditStep { loss: LossFunction::Fdp, alpha: 0.1, set: s(&[1, 2]) },
            AuditStep { loss: LossFunction::fwer(), alpha: 0.1, set: s(&[1]) },
            AuditStep { loss: LossFunction::Fdp, alpha: 0.1, set: Subset::EMPTY },
        ];
        let audit = audit_post_hoc(&c, &steps).unwrap();
        assert!(audit.passed, "{audit:?}");
        assert_eq!(audit.collection_fingerprint, c.fingerprint());

        // critical alpha of {1} is 0.075: passes at 0.1, fails at 0.05
        let steps = vec![
            AuditStep { loss: LossFunction::Fdp, alpha: 0.1, set: s(&[1]) },
            AuditStep { loss: LossFunction::Fdp, alpha: 0.05, set: s(&[1]) },
        ];
        let audit = audit_post_hoc(&c, &steps).unwrap();
        assert!(!audit.passed);
        assert!(audit.steps[0].certificate.member);
        assert!(audit.steps[1].certificate.witness.is_some());
    }

    #[test]
    fn audit_rejects_mixed_alpha_on_dependent_collection() {
        let p = ValueVector::pvalues(vec![0.01, 0.02]).unwrap();
        let c = crate::collections::by_collection(&p, 0.05).unwrap();
        let steps = vec![
            AuditStep { loss: LossFunction::Fdp, alpha: 0.05, set: Subset::EMPTY },
            AuditStep { loss: LossFunction::Fdp, alpha: 0.1, set: Subset::EMPTY },
        ];
        assert!(audit_post_hoc(&c, &steps).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let c = mean(vec![1.0; 30]);
        assert!(matches!(member(&c, &LossFunction::Fdp, 0.1, Subset::EMPTY), Err(Error::CapExceeded { .. })));
        let c = mean(vec![1.0; 21]);
        assert!(enumerate_collection(&c, &LossFunction::Fdp, 0.1).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let e: Vec<f64> = (0..17).map(|i| ((i * 37 % 17) as f64) * 1.7).collect();
        let c = mean(e);
        let seq = Engine { parallel: false, ..Engine::default() };
        let par = Engine::default();
        for r in [s(&[1, 2, 3]), s(&[5]), s(&[2, 9, 11, 17])] {
            assert_eq!(seq.member(&c, &LossFunction::Fdp, 0.1, r).unwrap(), par.member(&c, &LossFunction::Fdp, 0.1, r).unwrap());
        }
    }
}
