//! Fast algorithms and dominance relations against exhaustive enumeration
//! on seeded random instances.
//!
//! Each mismatch is reported with the offending [`Instance`] as one JSON
//! line, which `selfcheck --replay` re-evaluates.

use std::fmt::Write as _;
use std::sync::Arc;

use clap::ValueEnum;
use eclosure_core::collections::{bh_collection, by_collection, knockoff_collection, mean_collection, su_collection};
use eclosure_core::procedures::{self, RunOptions};
use eclosure_core::randomization::{stochastic_round, RoundingSource};
use eclosure_core::shortcuts::{
    closedbh_member_rule, closedknockoff_member_rule, ebhbar_largest_fast, ebhbar_member_fast, eholm_fast,
    monotone_largest, monotone_member_fast,
};
use eclosure_core::values::{ascending_order, descending_order};
use eclosure_core::{ECollection, Engine, LossFunction, Method, Subset, ValueKind, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Largest `m` the self-check accepts.
pub const MAX_M: usize = 12;
/// Largest `m` for the stochastic-rounding check, which enumerates the
/// whole closure.
pub const ROUNDING_MAX_M: usize = 10;

const ALPHAS: [f64; 3] = [0.05, 0.1, 0.2];
const ROUNDING_U: [f64; 4] = [0.0, 0.3, 0.7, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    EbhbarMember,
    EbhbarLargest,
    ByMember,
    ByLargest,
    SuMember,
    SuLargest,
    ClosedBhRule,
    ClosedKnockoffRule,
    Eholm,
    EbhDominance,
    ByDominance,
    SuDominance,
    BhLargest,
    KnockoffLargest,
    RoundingDominance,
}

impl Check {
    /// Shortcut algorithms compared with the exhaustive engine.
    pub const ORACLE: [Check; 9] = [
        Check::EbhbarMember,
        Check::EbhbarLargest,
        Check::ByMember,
        Check::ByLargest,
        Check::SuMember,
        Check::SuLargest,
        Check::ClosedBhRule,
        Check::ClosedKnockoffRule,
        Check::Eholm,
    ];

    /// Closed procedures against their classical counterparts.
    pub const DOMINANCE: [Check; 6] = [
        Check::EbhDominance,
        Check::ByDominance,
        Check::SuDominance,
        Check::BhLargest,
        Check::KnockoffLargest,
        Check::RoundingDominance,
    ];

    pub fn all() -> Vec<Check> {
        Check::ORACLE.iter().chain(&Check::DOMINANCE).copied().collect()
    }

    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    fn input(self) -> ValueKind {
        match self {
            Check::ByMember
            | Check::ByLargest
            | Check::SuMember
            | Check::SuLargest
            | Check::ClosedBhRule
            | Check::ByDominance
            | Check::SuDominance
            | Check::BhLargest => ValueKind::Pvalue,
            Check::ClosedKnockoffRule | Check::KnockoffLargest => ValueKind::KnockoffStat,
            _ => ValueKind::Evalue,
        }
    }

    fn takes_set(self) -> bool {
        matches!(
            self,
            Check::EbhbarMember | Check::ByMember | Check::SuMember | Check::ClosedBhRule | Check::ClosedKnockoffRule
        )
    }
}

/// One replayable test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub check: Check,
    pub alpha: f64,
    pub values: ValueVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Subset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
}

/// E-values near the eBH thresholds, with zeros and occasional ties.
pub fn random_evalues(rng: &mut ChaCha8Rng, m: usize, alpha: f64) -> ValueVector {
    let scale = m as f64 / alpha;
    let v = (0..m)
        .map(|_| match rng.random_range(0..10) {
            0..=2 => 0.0,
            3 => (scale * 0.5).round(),
            _ => scale * rng.random::<f64>().powi(2),
        })
        .collect();
    ValueVector::evalues(v).expect("generated e-values are valid")
}

/// Uniform nulls mixed with small signal p-values.
pub fn random_pvalues(rng: &mut ChaCha8Rng, m: usize) -> ValueVector {
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
    ValueVector::pvalues(v).expect("generated p-values are valid")
}

/// Knockoff statistics on a half-integer grid so that ties occur.
pub fn random_knockoff(rng: &mut ChaCha8Rng, m: usize) -> ValueVector {
    let v = (0..m)
        .map(|_| {
            let shift = if rng.random_bool(0.6) { 2.0 } else { 0.0 };
            ((rng.random::<f64>() * 6.0 - 3.0 + shift) * 2.0).round() / 2.0
        })
        .collect();
    ValueVector::knockoff(v).expect("generated statistics are valid")
}

/// A random instance for `check`. Knockoff checks use twice the level.
pub fn random_instance(check: Check, m: usize, trial: usize, rng: &mut ChaCha8Rng) -> Instance {
    let mut alpha = ALPHAS[trial % ALPHAS.len()];
    let values = match check.input() {
        ValueKind::Evalue => random_evalues(rng, m, alpha),
        ValueKind::Pvalue => random_pvalues(rng, m),
        ValueKind::KnockoffStat => {
            alpha *= 2.0;
            random_knockoff(rng, m)
        }
    };
    let set = check.takes_set().then(|| {
        if rng.random_bool(0.5) {
            let order = match values.kind() {
                ValueKind::Pvalue => ascending_order(values.values()),
                _ => descending_order(values.values()),
            };
            Subset::prefix(&order, rng.random_range(0..=m))
        } else {
            Subset::from_bits(rng.random_range(0..(1u64 << m)))
        }
    });
    let u = (check == Check::RoundingDominance).then(|| ROUNDING_U[trial % ROUNDING_U.len()]);
    Instance { check, alpha, values, set, u }
}

fn fdp() -> LossFunction {
    LossFunction::Fdp
}

fn verdicts(fast: bool, slow: bool) -> Option<String> {
    (fast != slow).then(|| format!("fast verdict {fast}, exhaustive verdict {slow}"))
}

fn sets(fast: Subset, slow: Subset) -> Option<String> {
    (fast != slow).then(|| format!("fast set {fast}, exhaustive set {slow}"))
}

fn closed_collection(method: Method, values: &ValueVector, alpha: f64) -> Result<(Subset, Arc<ECollection>)> {
    let r = procedures::run(method, values, alpha, &RunOptions::default())?;
    let c = r.collection.expect("closed methods carry a collection");
    Ok((r.rejected, c))
}

/// Dominance: the classical set is a member and no larger than the closed
/// set.
fn dominates(engine: &Engine, closed: Method, classical: Method, values: &ValueVector, alpha: f64) -> Result<Option<String>> {
    let (closed_set, c) = closed_collection(closed, values, alpha)?;
    let base = procedures::run(classical, values, alpha, &RunOptions::default())?.rejected;
    if !engine.member(&c, &fdp(), alpha, base)?.member {
        return Ok(Some(format!("{classical} set {base} is not a member of the {closed} collection")));
    }
    if closed_set.len() < base.len() {
        return Ok(Some(format!("{closed} rejects {} < {} by {classical}", closed_set.len(), base.len())));
    }
    Ok(None)
}

/// Evaluates one instance; `Some(reason)` on a mismatch. With `fault`, the
/// outcome of every comparison is inverted.
pub fn check_instance(engine: &Engine, inst: &Instance, fault: bool) -> Result<Option<String>> {
    let Instance { check, alpha: a, ref values, set, u } = *inst;
    let v = values;
    if v.kind() != check.input() {
        return Err(CliError::Input(format!("{} needs {} values, found {}", check.name(), check.input(), v.kind())));
    }
    let r = || set.ok_or_else(|| CliError::Input(format!("{} needs a set", check.name())));
    let m = v.m();
    let asc = || ascending_order(v.values());
    let desc = || descending_order(v.values());
    let outcome = match check {
        Check::EbhbarMember => {
            let c = mean_collection(v)?;
            verdicts(ebhbar_member_fast(v, a, r()?)?.member, engine.member(&c, &fdp(), a, r()?)?.member)
        }
        Check::EbhbarLargest => {
            let c = mean_collection(v)?;
            sets(ebhbar_largest_fast(v, a)?, engine.largest_member(&c, &fdp(), a, &desc(), false)?)
        }
        Check::ByMember | Check::SuMember => {
            let c = if check == Check::ByMember { by_collection(v, a)? } else { su_collection(v, a)? };
            verdicts(monotone_member_fast(&c, a, r()?)?.member, engine.member(&c, &fdp(), a, r()?)?.member)
        }
        Check::ByLargest | Check::SuLargest => {
            let c = if check == Check::ByLargest { by_collection(v, a)? } else { su_collection(v, a)? };
            sets(monotone_largest(&c, a)?, engine.largest_member(&c, &fdp(), a, &asc(), false)?)
        }
        Check::ClosedBhRule => {
            let c = bh_collection(v, a)?;
            verdicts(closedbh_member_rule(v, a, r()?)?.member, engine.member(&c, &fdp(), a, r()?)?.member)
        }
        Check::ClosedKnockoffRule => {
            let c = knockoff_collection(v, a)?;
            verdicts(closedknockoff_member_rule(v, a, r()?)?.member, engine.member(&c, &fdp(), a, r()?)?.member)
        }
        Check::Eholm => {
            let c = mean_collection(v)?;
            sets(eholm_fast(v.values(), a), engine.fwer_reject_set(&c, a)?)
        }
        Check::EbhDominance => match dominates(engine, Method::ClosedEbh, Method::Ebh, v, a)? {
            // below five hypotheses ma-eBH can reject a set outside the closure
            None if m >= 5 => dominates(engine, Method::ClosedEbh, Method::MaEbh, v, a)?,
            other => other,
        },
        Check::ByDominance => dominates(engine, Method::ClosedBy, Method::By, v, a)?,
        Check::SuDominance => dominates(engine, Method::ClosedSu, Method::Su, v, a)?,
        Check::BhLargest | Check::KnockoffLargest => {
            let (closed, classical, order) = if check == Check::BhLargest {
                (Method::ClosedBh, Method::Bh, asc())
            } else {
                (Method::ClosedKnockoff, Method::Knockoff, desc())
            };
            let (closed_set, c) = closed_collection(closed, v, a)?;
            let base = procedures::run(classical, v, a, &RunOptions::default())?.rejected;
            sets(closed_set, base).or(sets(engine.largest_member(&c, &fdp(), a, &order, false)?, base))
        }
        Check::RoundingDominance => {
            if m > ROUNDING_MAX_M {
                return Err(CliError::Input(format!("rounding check needs m ≤ {ROUNDING_MAX_M}")));
            }
            let u = u.ok_or_else(|| CliError::Input("rounding check needs u".into()))?;
            let c = mean_collection(v)?;
            let rounded = stochastic_round(engine, &c, &fdp(), a, &RoundingSource::fixed(u)?)?;
            let base = engine.enumerate_collection(&c, &fdp(), a)?;
            let after = engine.enumerate_collection(&rounded, &fdp(), a)?;
            (!after.is_superset_of(&base)).then(|| format!("rounded collection drops members at u = {u}"))
        }
    };
    Ok(match (outcome, fault) {
        (None, false) => None,
        (Some(reason), false) => Some(reason),
        (None, true) => Some("injected fault: verdicts agree but the comparison is inverted".into()),
        (Some(_), true) => None,
    })
}

#[derive(Debug, Clone)]
pub struct SelfcheckOptions {
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub inject_fault: bool,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions { m: 8, trials: 500, seed: 0, checks: Check::all(), inject_fault: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelfcheckReport {
    pub text: String,
    pub instances: usize,
    pub mismatches: Vec<Instance>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn rng_for(seed: u64, m: usize, check: Check) -> ChaCha8Rng {
    let idx = Check::all().iter().position(|&c| c == check).unwrap_or(0) as u64;
    ChaCha8Rng::seed_from_u64(seed ^ ((idx + 1) << 40) ^ ((m as u64) << 32))
}

/// Runs `trials` instances of each selected check. The report depends only
/// on the options.
pub fn selfcheck(engine: &Engine, opts: &SelfcheckOptions) -> Result<SelfcheckReport> {
    let m = opts.m;
    if !(1..=MAX_M).contains(&m) {
        return Err(CliError::Input(format!("selfcheck needs 1 ≤ m ≤ {MAX_M}, got {m}")));
    }
    let mut report = SelfcheckReport::default();
    let _ = writeln!(report.text, "selfcheck m={m} trials={} seed={}", opts.trials, opts.seed);
    for &check in &opts.checks {
        if check == Check::RoundingDominance && m > ROUNDING_MAX_M {
            let _ = writeln!(report.text, "{:<22} skipped (m > {ROUNDING_MAX_M})", check.name());
            continue;
        }
        let mut rng = rng_for(opts.seed, m, check);
        let mut bad = 0;
        for t in 0..opts.trials {
            let inst = random_instance(check, m, t, &mut rng);
            report.instances += 1;
            if let Some(reason) = check_instance(engine, &inst, opts.inject_fault)? {
                bad += 1;
                let _ = writeln!(report.text, "mismatch {} trial {t}: {reason}", check.name());
                let _ = writeln!(report.text, "  replay: {}", serde_json::to_string(&inst)?);
                report.mismatches.push(inst);
            }
        }
        let status = if bad == 0 { "ok".to_string() } else { format!("{bad} mismatches") };
        let _ = writeln!(report.text, "{:<22} {:>6} {status}", check.name(), opts.trials);
    }
    let _ = writeln!(
        report.text,
        "{}: {} instances, {} mismatches",
        if report.passed() { "PASS" } else { "FAIL" },
        report.instances,
        report.mismatches.len()
    );
    Ok(report)
}

/// Re-evaluates the instances in `text`: JSON lines, or a mismatch report
/// whose `replay:` lines are picked out.
pub fn replay(engine: &Engine, text: &str) -> Result<SelfcheckReport> {
    let mut report = SelfcheckReport::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        let line = line.strip_prefix("replay:").unwrap_or(line).trim();
        if !line.starts_with('{') {
            continue;
        }
        let inst: Instance =
            serde_json::from_str(line).map_err(|e| CliError::parse(n as u64 + 1, format!("bad instance: {e}")))?;
        report.instances += 1;
        match check_instance(engine, &inst, false)? {
            Some(reason) => {
                let _ = writeln!(report.text, "line {}: {} mismatch: {reason}", n + 1, inst.check.name());
                report.mismatches.push(inst);
            }
            None => {
                let _ = writeln!(report.text, "line {}: {} ok", n + 1, inst.check.name());
            }
        }
    }
    Ok(report)
}
