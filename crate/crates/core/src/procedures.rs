//! Classical multiple testing procedures and their closed counterparts.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calibrators::{HarmonicTable, SuConstants};
use crate::collections::{
    bh_collection, by_collection, knockoff_collection, mean_collection, storey_adabh_collection, su_collection,
    ECollection, KnockoffStats,
};
use crate::compare::ComparePolicy;
use crate::error::{check_alpha, Error, Result};
use crate::loss::LossFunction;
use crate::shortcuts::{
    closedbh_member_rule, closedknockoff_member_rule, ebhbar_largest_fast, eholm_fast, monotone_largest,
    worst_case_largest,
};
use crate::subset::Subset;
use crate::values::{ascending_order, descending_order, ValueKind, ValueVector};

/// Default Storey tuning parameter.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// A procedure name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ebh,
    MaEbh,
    Bh,
    By,
    Su,
    StoreyBh,
    Knockoff,
    ClosedEbh,
    ClosedBy,
    ClosedSu,
    ClosedBh,
    ClosedAdabh,
    ClosedKnockoff,
    Eholm,
}

impl Method {
    pub const ALL: [Method; 14] = [
        Method::Ebh,
        Method::MaEbh,
        Method::Bh,
        Method::By,
        Method::Su,
        Method::StoreyBh,
        Method::Knockoff,
        Method::ClosedEbh,
        Method::ClosedBy,
        Method::ClosedSu,
        Method::ClosedBh,
        Method::ClosedAdabh,
        Method::ClosedKnockoff,
        Method::Eholm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ebh => "ebh",
            Method::MaEbh => "ma-ebh",
            Method::Bh => "bh",
            Method::By => "by",
            Method::Su => "su",
            Method::StoreyBh => "storey-bh",
            Method::Knockoff => "knockoff",
            Method::ClosedEbh => "closed-ebh",
            Method::ClosedBy => "closed-by",
            Method::ClosedSu => "closed-su",
            Method::ClosedBh => "closed-bh",
            Method::ClosedAdabh => "closed-adabh",
            Method::ClosedKnockoff => "closed-knockoff",
            Method::Eholm => "eholm",
        }
    }

    /// The kind of input values the method consumes.
    pub fn input_kind(self) -> ValueKind {
        match self {
            Method::Ebh | Method::MaEbh | Method::ClosedEbh | Method::Eholm => ValueKind::Evalue,
            Method::Knockoff | Method::ClosedKnockoff => ValueKind::KnockoffStat,
            _ => ValueKind::Pvalue,
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(
            self,
            Method::ClosedEbh
                | Method::ClosedBy
                | Method::ClosedSu
                | Method::ClosedBh
                | Method::ClosedAdabh
                | Method::ClosedKnockoff
                | Method::Eholm
        )
    }

    /// The classical procedure a closed method improves on.
    pub fn classical(self) -> Option<Method> {
        match self {
            Method::ClosedEbh => Some(Method::Ebh),
            Method::ClosedBy => Some(Method::By),
            Method::ClosedSu => Some(Method::Su),
            Method::ClosedBh => Some(Method::Bh),
            Method::ClosedAdabh => Some(Method::StoreyBh),
            Method::ClosedKnockoff => Some(Method::Knockoff),
            _ => None,
        }
    }

    /// The closed counterpart of a classical procedure.
    pub fn closed(self) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.classical() == Some(self))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Invalid(format!("unknown method '{s}'")))
    }
}

/// Thresholds and counts reported alongside a rejection set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// The rejection index `r`.
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_ext::opt_real")]
    pub c_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_ext::opt_real")]
    pub pi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_ext::opt_real")]
    pub ell: Option<f64>,
}

/// The outcome of running a procedure.
#[derive(Debug, Clone, Serialize)]
pub struct ProcedureResult {
    pub method: Method,
    pub rejected: Subset,
    pub alpha: f64,
    /// The e-collection behind a closed method, for post hoc queries.
    #[serde(skip)]
    pub collection: Option<Arc<ECollection>>,
    pub diagnostics: Diagnostics,
}

impl ProcedureResult {
    fn classical(method: Method, rejected: Subset, alpha: f64, diagnostics: Diagnostics) -> Self {
        ProcedureResult { method, rejected, alpha, collection: None, diagnostics }
    }

    fn closed(method: Method, rejected: Subset, alpha: f64, c: ECollection, mut diagnostics: Diagnostics) -> Self {
        diagnostics.r = rejected.len();
        ProcedureResult { method, rejected, alpha, collection: Some(Arc::new(c)), diagnostics }
    }
}

/// Tuning knobs shared by the procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub lambda: f64,
    pub policy: ComparePolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { lambda: DEFAULT_LAMBDA, policy: ComparePolicy::default() }
    }
}

/// `max{i : p_(i) ≤ slope·i}`, or 0.
pub fn bh_count(p: &[f64], slope: f64) -> usize {
    step_up_count(p, slope, ComparePolicy::default())
}

pub fn step_up_count(p: &[f64], slope: f64, policy: ComparePolicy) -> usize {
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    (1..=sorted.len()).rev().find(|&i| policy.le(sorted[i - 1], slope * i as f64)).unwrap_or(0)
}

/// The `r` smallest p-values, ties by smallest index.
fn smallest(p: &[f64], r: usize) -> Subset {
    Subset::prefix(&ascending_order(p), r)
}

/// Storey estimate `π̂₀ = max_i π̂(p with p_i set to 0)` with
/// `π̂ = (1 + #{p_j > λ})/(m(1 − λ))`.
pub fn storey_pi0(p: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda must be in (0, 1), got {lambda}")));
    }
    let m = p.len();
    if m == 0 {
        return Err(Error::InvalidCount { m, max: crate::subset::MAX_HYPOTHESES });
    }
    let above = p.iter().filter(|&&x| x > lambda).count();
    // zeroing a p-value above λ drops the count by one; any other leaves it
    let count = if above == m { above - 1 } else { above };
    Ok((1 + count) as f64 / (m as f64 * (1.0 - lambda)))
}

/// eBH: the `r` largest e-values with `r = max{r : r·e_(r) ≥ m/α}`.
pub fn ebh(e: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    ebh_with(e, alpha, ComparePolicy::default())
}

fn ebh_with(e: &ValueVector, alpha: f64, policy: ComparePolicy) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    let v = e.expect(ValueKind::Evalue)?;
    let m = v.len() as f64;
    let order = descending_order(v);
    let r = (1..=order.len()).rev().find(|&r| policy.ge(r as f64 * v[order[r - 1]], m / alpha)).unwrap_or(0);
    let d = Diagnostics { r, ..Diagnostics::default() };
    Ok(ProcedureResult::classical(Method::Ebh, Subset::prefix(&order, r), alpha, d))
}

/// Minimally adaptive eBH: thresholds `(m − 1)/(αr)`, gated on the mean
/// e-value strictly exceeding `1/α`.
pub fn ma_ebh(e: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    let policy = ComparePolicy::default();
    let v = e.expect(ValueKind::Evalue)?;
    let m = v.len();
    let order = descending_order(v);
    let r = (1..=m)
        .rev()
        .find(|&r| policy.ge(v[order[r - 1]], (m - 1) as f64 / (alpha * r as f64)))
        .unwrap_or(0);
    let mean = v.iter().sum::<f64>() / m as f64;
    let rejected = if mean > 1.0 / alpha { Subset::prefix(&order, r) } else { Subset::EMPTY };
    let d = Diagnostics { r: rejected.len(), ..Diagnostics::default() };
    Ok(ProcedureResult::classical(Method::MaEbh, rejected, alpha, d))
}

fn step_up(method: Method, p: &ValueVector, alpha: f64, level: f64, d: Diagnostics) -> Result<ProcedureResult> {
    let v = p.expect(ValueKind::Pvalue)?;
    let r = bh_count(v, level / v.len() as f64);
    Ok(ProcedureResult::classical(method, smallest(v, r), alpha, Diagnostics { r, ..d }))
}

/// Benjamini–Hochberg step-up at level α.
pub fn bh(p: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    step_up(Method::Bh, p, alpha, alpha, Diagnostics::default())
}

/// Benjamini–Yekutieli: BH at `α/h_m`.
pub fn by(p: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    let h = HarmonicTable::new(p.m()).get(p.m());
    step_up(Method::By, p, alpha, alpha / h, Diagnostics::default())
}

/// BH at `α/ℓ_α`.
pub fn su(p: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    let c = SuConstants::new(alpha)?;
    step_up(Method::Su, p, alpha, alpha / c.ell, Diagnostics { ell: Some(c.ell), ..Diagnostics::default() })
}

/// Adaptive BH at `α/π̂₀` with the Storey estimate.
pub fn storey_bh(p: &ValueVector, alpha: f64, lambda: f64) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    let pi0 = storey_pi0(p.expect(ValueKind::Pvalue)?, lambda)?;
    step_up(Method::StoreyBh, p, alpha, alpha / pi0, Diagnostics { pi0: Some(pi0), ..Diagnostics::default() })
}

/// Knockoff filter: `R = {i : w_i ≥ c_α}`.
pub fn knockoff_filter(w: &ValueVector, alpha: f64) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    let st = KnockoffStats::new(w.expect(ValueKind::KnockoffStat)?, alpha);
    let d = Diagnostics { r: st.positive.len(), c_alpha: Some(st.c_alpha), ..Diagnostics::default() };
    Ok(ProcedureResult::classical(Method::Knockoff, st.positive, alpha, d))
}

fn largest_by_rule<F>(order: &[usize], mut member: F) -> Result<Subset>
where
    F: FnMut(Subset) -> Result<bool>,
{
    for r in (1..=order.len()).rev() {
        let set = Subset::prefix(order, r);
        if member(set)? {
            return Ok(set);
        }
    }
    Ok(Subset::EMPTY)
}

/// A closed method: builds its e-collection and returns the longest member
/// prefix of the natural ordering.
pub fn closed_variant(method: Method, values: &ValueVector, alpha: f64, opts: &RunOptions) -> Result<ProcedureResult> {
    check_alpha(alpha)?;
    values.expect(method.input_kind())?;
    let v = values.values();
    match method {
        Method::ClosedEbh => {
            let c = mean_collection(values)?;
            let r = ebhbar_largest_fast(values, alpha)?;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics::default()))
        }
        Method::ClosedBy => {
            let c = by_collection(values, alpha)?;
            let r = monotone_largest(&c, alpha)?;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics::default()))
        }
        Method::ClosedSu => {
            let c = su_collection(values, alpha)?;
            let r = monotone_largest(&c, alpha)?;
            let ell = SuConstants::new(alpha)?.ell;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics { ell: Some(ell), ..Diagnostics::default() }))
        }
        Method::ClosedBh => {
            let c = bh_collection(values, alpha)?;
            let r = largest_by_rule(&ascending_order(v), |set| Ok(closedbh_member_rule(values, alpha, set)?.member))?;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics::default()))
        }
        Method::ClosedAdabh => {
            let c = storey_adabh_collection(values, alpha, opts.lambda)?;
            let pi0 = storey_pi0(v, opts.lambda)?;
            let r = worst_case_largest(&c, &LossFunction::Fdp, alpha, &ascending_order(v), opts.policy)?;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics { pi0: Some(pi0), ..Diagnostics::default() }))
        }
        Method::ClosedKnockoff => {
            let c = knockoff_collection(values, alpha)?;
            let c_alpha = c.knockoff_stats().map(|s| s.c_alpha);
            let r = largest_by_rule(&descending_order(v), |set| {
                Ok(closedknockoff_member_rule(values, alpha, set)?.member)
            })?;
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics { c_alpha, ..Diagnostics::default() }))
        }
        Method::Eholm => {
            let c = mean_collection(values)?;
            let r = eholm_fast(v, alpha);
            Ok(ProcedureResult::closed(method, r, alpha, c, Diagnostics::default()))
        }
        other => Err(Error::Unsupported(format!("{other} is not a closed method"))),
    }
}

/// Runs any procedure by name.
pub fn run(method: Method, values: &ValueVector, alpha: f64, opts: &RunOptions) -> Result<ProcedureResult> {
    match method {
        Method::Ebh => ebh_with(values, alpha, opts.policy),
        Method::MaEbh => ma_ebh(values, alpha),
        Method::Bh => bh(values, alpha),
        Method::By => by(values, alpha),
        Method::Su => su(values, alpha),
        Method::StoreyBh => storey_bh(values, alpha, opts.lambda),
        Method::Knockoff => knockoff_filter(values, alpha),
        _ => closed_variant(method, values, alpha, opts),
    }
}
