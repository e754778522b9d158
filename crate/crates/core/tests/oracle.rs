//! Fast algorithms against exhaustive enumeration on seeded random instances.

mod common;

use eclosure_core::collections::{bh_collection, by_collection, knockoff_collection, mean_collection, su_collection};
use eclosure_core::shortcuts::{
    closedbh_member_rule, closedknockoff_member_rule, critical_alpha_auto, ebhbar_largest_fast, ebhbar_member_fast,
    eholm_fast, monotone_largest, monotone_member_fast, true_discovery_bound_auto, worst_case_member,
};
use eclosure_core::values::{ascending_order, descending_order};
use eclosure_core::{ComparePolicy, Engine, LossFunction, Subset};

const ALPHAS: [f64; 3] = [0.05, 0.1, 0.2];
const INSTANCES: u64 = 150;

fn engine() -> Engine {
    Engine::default()
}

#[test]
fn ebhbar_member_and_largest_match_engine() {
    for m in [5, 8, 12] {
        let mut rng = common::rng(100 + m as u64);
        for t in 0..INSTANCES {
            let a = ALPHAS[(t % 3) as usize];
            let e = common::evalues(&mut rng, m, a);
            let c = mean_collection(&e).unwrap();
            let order = descending_order(e.values());
            for _ in 0..4 {
                let r = common::discovery_set(&mut rng, &order);
                let fast = ebhbar_member_fast(&e, a, r).unwrap();
                let slow = engine().member(&c, &LossFunction::Fdp, a, r).unwrap();
                assert_eq!(fast.member, slow.member, "m={m} t={t} R={r} e={:?}", e.values());
                if let Some(w) = fast.witness {
                    assert!(c.evaluate(w) < LossFunction::Fdp.eval(w, r) / a);
                }
            }
            let fast = ebhbar_largest_fast(&e, a).unwrap();
            let slow = engine().largest_member(&c, &LossFunction::Fdp, a, &order, false).unwrap();
            assert_eq!(fast, slow, "m={m} t={t}");
        }
    }
}

#[test]
fn monotone_scan_matches_engine_for_by_and_su() {
    for m in [5, 8, 12] {
        let mut rng = common::rng(200 + m as u64);
        for t in 0..INSTANCES {
            let a = ALPHAS[(t % 3) as usize];
            let p = common::pvalues(&mut rng, m);
            let order = ascending_order(p.values());
            for c in [by_collection(&p, a).unwrap(), su_collection(&p, a).unwrap()] {
                for _ in 0..3 {
                    let r = common::discovery_set(&mut rng, &order);
                    let fast = monotone_member_fast(&c, a, r).unwrap();
                    let slow = engine().member(&c, &LossFunction::Fdp, a, r).unwrap();
                    assert_eq!(fast.member, slow.member, "{} m={m} t={t} R={r}", c.builder_name());
                }
                let fast = monotone_largest(&c, a).unwrap();
                let slow = engine().largest_member(&c, &LossFunction::Fdp, a, &order, false).unwrap();
                assert_eq!(fast, slow, "{} m={m} t={t}", c.builder_name());
            }
        }
    }
}

#[test]
fn closed_form_rules_match_engine() {
    for m in [5, 8, 12] {
        let mut rng = common::rng(300 + m as u64);
        for t in 0..INSTANCES {
            let a = ALPHAS[(t % 3) as usize];
            let p = common::pvalues(&mut rng, m);
            let bh = bh_collection(&p, a).unwrap();
            let w = common::knockoff(&mut rng, m);
            let kn = knockoff_collection(&w, a * 2.0).unwrap();
            for _ in 0..3 {
                let r = common::discovery_set(&mut rng, &ascending_order(p.values()));
                let rule = closedbh_member_rule(&p, a, r).unwrap();
                assert_eq!(rule.member, engine().member(&bh, &LossFunction::Fdp, a, r).unwrap().member);
                let r = common::discovery_set(&mut rng, &descending_order(w.values()));
                let rule = closedknockoff_member_rule(&w, a * 2.0, r).unwrap();
                assert_eq!(rule.member, engine().member(&kn, &LossFunction::Fdp, a * 2.0, r).unwrap().member);
            }
        }
    }
}

#[test]
fn eholm_matches_fwer_reject_set() {
    for m in [5, 8, 12] {
        let mut rng = common::rng(400 + m as u64);
        for t in 0..INSTANCES {
            let a = ALPHAS[(t % 3) as usize];
            let e = common::evalues(&mut rng, m, a);
            let c = mean_collection(&e).unwrap();
            assert_eq!(eholm_fast(e.values(), a), engine().fwer_reject_set(&c, a).unwrap(), "m={m} t={t}");
        }
    }
}

#[test]
fn worst_case_scan_matches_engine_for_other_losses() {
    let losses = [
        LossFunction::fwer(),
        LossFunction::kfwer(2).unwrap(),
        LossFunction::Pfer,
        LossFunction::fdx(0.2).unwrap(),
        LossFunction::Aer,
        LossFunction::true_discovery_shortfall(2),
    ];
    let mut rng = common::rng(500);
    for t in 0..60 {
        let m = 6 + (t % 3) as usize;
        let a = 0.1;
        let e = common::evalues(&mut rng, m, a);
        let p = common::pvalues(&mut rng, m);
        let w = common::knockoff(&mut rng, m);
        let cols = [
            mean_collection(&e).unwrap(),
            by_collection(&p, a).unwrap(),
            su_collection(&p, a).unwrap(),
            bh_collection(&p, a).unwrap(),
            knockoff_collection(&w, 0.3).unwrap(),
        ];
        for c in &cols {
            for loss in &losses {
                let r = Subset::from_bits(rand::Rng::random_range(&mut rng, 0..(1u64 << m)));
                let fast = worst_case_member(c, loss, a, r, ComparePolicy::default()).unwrap();
                let slow = engine().member(c, loss, a, r).unwrap();
                assert_eq!(fast.member, slow.member, "{} {loss} R={r}", c.builder_name());
            }
            let r = Subset::from_bits(rand::Rng::random_range(&mut rng, 0..(1u64 << m)));
            assert_eq!(
                true_discovery_bound_auto(&engine(), c, a, r).unwrap(),
                engine().true_discovery_bound(c, a, r).unwrap()
            );
        }
        let r = Subset::from_bits(rand::Rng::random_range(&mut rng, 0..(1u64 << m)));
        let fast = critical_alpha_auto(&engine(), &cols[0], &LossFunction::Fdp, r).unwrap();
        let slow = engine().critical_alpha(&cols[0], &LossFunction::Fdp, r).unwrap();
        assert!(fast == slow || (fast - slow).abs() <= 1e-12 * slow.abs(), "{fast} vs {slow}");
    }
}

#[test]
fn exhaustive_largest_is_at_least_prefix_largest() {
    let mut rng = common::rng(600);
    for _ in 0..60 {
        let m = 7;
        let e = common::evalues(&mut rng, m, 0.1);
        let c = mean_collection(&e).unwrap();
        let order = descending_order(e.values());
        let prefix = engine().largest_member(&c, &LossFunction::Fdp, 0.1, &order, false).unwrap();
        let best = engine().largest_member(&c, &LossFunction::Fdp, 0.1, &order, true).unwrap();
        assert!(best.len() >= prefix.len());
        assert!(engine().member(&c, &LossFunction::Fdp, 0.1, best).unwrap().member);
    }
}
