//! E-collections: evaluators `S ↦ e_S` over nonempty subsets of `[m]`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::calibrators::{by_term, simes_sorted, HarmonicTable, SuConstants};
use crate::compare::ComparePolicy;
use crate::error::{check_alpha, Error, Result};
use crate::loss::LossFunction;
use crate::procedures::{bh_count, storey_pi0};
use crate::randomization::{truncate, TruncationGrid};
use crate::serde_ext::ExtReal;
use crate::subset::Subset;
use crate::values::{ascending_order, descending_order, ValueKind, ValueVector};

/// Capability flags of an e-collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Flags {
    /// `e_S` does not depend on the level α.
    pub alpha_independent: bool,
    /// `e_S` is weakly decreasing in every p-value.
    pub monotone_in_p: bool,
    /// `e_S` is the average of a stored base vector over `S`.
    pub mean_type: bool,
}

/// Which subsets may be true null sets.
#[derive(Clone)]
pub enum Feasibility {
    /// An explicit list of feasible sets.
    Sets(Arc<BTreeSet<Subset>>),
    /// A named predicate; the name enters the collection fingerprint.
    Predicate { name: String, test: Arc<dyn Fn(Subset) -> bool + Send + Sync> },
}

impl Feasibility {
    pub fn sets<I: IntoIterator<Item = Subset>>(sets: I) -> Self {
        Feasibility::Sets(Arc::new(sets.into_iter().collect()))
    }

    pub fn predicate<F>(name: impl Into<String>, test: F) -> Self
    where
        F: Fn(Subset) -> bool + Send + Sync + 'static,
    {
        Feasibility::Predicate { name: name.into(), test: Arc::new(test) }
    }

    pub fn allows(&self, s: Subset) -> bool {
        match self {
            Feasibility::Sets(sets) => sets.contains(&s),
            Feasibility::Predicate { test, .. } => test(s),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Feasibility::Sets(sets) => json!({ "sets": sets.iter().collect::<Vec<_>>() }),
            Feasibility::Predicate { name, .. } => json!({ "predicate": name }),
        }
    }
}

impl fmt::Debug for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Feasibility({})", self.describe())
    }
}

/// Pairwise-equality hypotheses `θ_j = θ_k` over `params` parameters.
///
/// Hypotheses are numbered in lexicographic pair order (1,2), (1,3), ….
/// A set of them can be the true null set only if the equalities it asserts
/// are closed under transitivity, i.e. they form the equivalence relation of
/// some partition of the parameters. Returns `m` and the feasibility test.
pub fn pairwise_equality_feasibility(params: usize) -> Result<(usize, Feasibility)> {
    let pairs: Vec<(usize, usize)> =
        (0..params).flat_map(|j| ((j + 1)..params).map(move |k| (j, k))).collect();
    let m = pairs.len();
    if m == 0 || m > 64 {
        return Err(Error::InvalidCount { m, max: 64 });
    }
    let test = move |s: Subset| {
        let mut parent: Vec<usize> = (0..params).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in s.iter() {
            let (a, b) = pairs[i];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        pairs.iter().enumerate().all(|(i, &(a, b))| {
            let same = find(&mut parent, a) == find(&mut parent, b);
            same == s.contains(i)
        })
    };
    Ok((m, Feasibility::predicate(format!("pairwise-equality({params})"), test)))
}

/// Threshold and counts of the knockoff filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnockoffStats {
    #[serde(skip)]
    pub w: Vec<f64>,
    #[serde(with = "crate::serde_ext::real")]
    pub c_alpha: f64,
    /// `#{j : w_j ≤ −c_α}`
    pub f_neg: usize,
    /// `{i : w_i ≥ c_α}`, the knockoff rejection set.
    pub positive: Subset,
    /// `{j : w_j ≤ −c_α}`
    pub negative: Subset,
}

impl KnockoffStats {
    pub fn new(w: &[f64], alpha: f64) -> Self {
        let c = knockoff_threshold(w, alpha);
        let positive = Subset::from_indices((0..w.len()).filter(|&i| w[i] >= c));
        let negative = Subset::from_indices((0..w.len()).filter(|&i| w[i] <= -c));
        KnockoffStats { w: w.to_vec(), c_alpha: c, f_neg: negative.len(), positive, negative }
    }
}

/// Smallest `c` among the distinct nonzero `|w_i|` with
/// `(1 + #{w ≤ −c}) / #{w ≥ c} ≤ α`; `+∞` when none qualifies.
pub fn knockoff_threshold(w: &[f64], alpha: f64) -> f64 {
    let mut cands: Vec<f64> = w.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let policy = ComparePolicy::default();
    for c in cands {
        let num = 1 + w.iter().filter(|&&x| x <= -c).count();
        let den = w.iter().filter(|&&x| x >= c).count();
        if den > 0 && policy.le(num as f64 / den as f64, alpha) {
            return c;
        }
    }
    f64::INFINITY
}

#[derive(Clone)]
pub(crate) enum Source {
    Mean { e: Vec<f64> },
    Product { e: Vec<f64> },
    Compound { e: Vec<f64> },
    By { p: Vec<f64>, alpha: f64, h: HarmonicTable },
    Su { p: Vec<f64>, su: SuConstants },
    Bh { p: Vec<f64>, alpha: f64, r: usize, base: Vec<f64> },
    AdaBh { p: Vec<f64>, alpha: f64, lambda: f64, pi0: f64, r: usize, base: Vec<f64> },
    Knockoff { stats: KnockoffStats, alpha: f64 },
    Procedure { family: Vec<Subset>, loss: LossFunction, alpha: f64 },
    Table { label: String, values: Arc<Vec<f64>> },
    Boosted { base: Box<ECollection>, alpha: f64, grids: Vec<TruncationGrid>, factors: Vec<f64> },
}

/// An e-collection: `e_S` for every nonempty `S ⊆ [m]`, with capability
/// flags, an optional feasibility restriction and a fingerprintable source
/// descriptor.
#[derive(Clone)]
pub struct ECollection {
    m: usize,
    source: Source,
    flags: Flags,
    feasible: Option<Feasibility>,
}

impl fmt::Debug for ECollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ECollection")
            .field("m", &self.m)
            .field("builder", &self.builder_name())
            .field("flags", &self.flags)
            .finish()
    }
}

impl ECollection {
    fn new(m: usize, source: Source, flags: Flags) -> Self {
        ECollection { m, source, flags, feasible: None }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn feasibility(&self) -> Option<&Feasibility> {
        self.feasible.as_ref()
    }

    pub fn is_restricted(&self) -> bool {
        self.feasible.is_some()
    }

    pub fn is_feasible(&self, s: Subset) -> bool {
        self.feasible.as_ref().map_or(true, |f| f.allows(s))
    }

    /// `e_S`; `+∞` for infeasible `S`. The empty set evaluates to 0 and is
    /// never consulted by the closure machinery.
    pub fn evaluate(&self, s: Subset) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        if !self.is_feasible(s) {
            return f64::INFINITY;
        }
        self.evaluate_unrestricted(s)
    }

    pub(crate) fn evaluate_unrestricted(&self, s: Subset) -> f64 {
        let k = s.len();
        match &self.source {
            Source::Mean { e } => sum_over(e, s) / k as f64,
            Source::Bh { base, .. } | Source::AdaBh { base, .. } => sum_over(base, s) / k as f64,
            Source::Compound { e } => sum_over(e, s) / self.m as f64,
            Source::Product { e } => product_over(e, s),
            Source::By { p, alpha, h } => {
                let hk = h.get(k);
                s.iter().map(|i| by_term(p[i], k, *alpha, hk)).sum()
            }
            Source::Su { p, su } => {
                let mut sub: Vec<f64> = s.iter().map(|i| p[i]).collect();
                sub.sort_by(f64::total_cmp);
                su.calibrate(simes_sorted(&sub))
            }
            Source::Knockoff { stats, .. } => {
                let pos = s.intersection(stats.positive).len() as f64;
                let neg = s.intersection(stats.negative).len() as f64;
                pos / (1.0 + neg)
            }
            Source::Procedure { family, loss, alpha } => {
                family.iter().map(|&r| loss.eval(s, r) / alpha).fold(0.0, f64::max)
            }
            Source::Table { values, .. } => values[s.bits() as usize],
            Source::Boosted { base, grids, factors, .. } => {
                let e = base.evaluate(s);
                if e.is_infinite() {
                    e
                } else {
                    truncate(factors[k - 1] * e, &grids[k - 1])
                }
            }
        }
    }

    /// Base e-values of a mean-type collection.
    pub fn base_values(&self) -> Option<&[f64]> {
        match &self.source {
            Source::Mean { e } => Some(e),
            Source::Bh { base, .. } | Source::AdaBh { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Terms and divisor when `e_S = Σ_{i∈S} t_i / d(S)`.
    pub(crate) fn additive_terms(&self) -> Option<(&[f64], Divisor)> {
        match &self.source {
            Source::Compound { e } => Some((e, Divisor::M)),
            _ => self.base_values().map(|b| (b, Divisor::Size)),
        }
    }

    /// p-values behind a p-monotone collection.
    pub fn p_values(&self) -> Option<&[f64]> {
        match &self.source {
            Source::By { p, .. } | Source::Su { p, .. } => Some(p),
            Source::Bh { p, .. } | Source::AdaBh { p, .. } => Some(p),
            _ => None,
        }
    }

    pub fn knockoff_stats(&self) -> Option<&KnockoffStats> {
        match &self.source {
            Source::Knockoff { stats, .. } => Some(stats),
            _ => None,
        }
    }

    /// The level baked into an α-dependent collection.
    pub fn alpha(&self) -> Option<f64> {
        match &self.source {
            Source::By { alpha, .. }
            | Source::Bh { alpha, .. }
            | Source::AdaBh { alpha, .. }
            | Source::Knockoff { alpha, .. }
            | Source::Procedure { alpha, .. }
            | Source::Boosted { alpha, .. } => Some(*alpha),
            Source::Su { su, .. } => Some(su.alpha),
            _ => None,
        }
    }

    /// The rejection count behind a BH or adaptive-BH collection.
    pub fn rejection_count(&self) -> Option<usize> {
        match &self.source {
            Source::Bh { r, .. } | Source::AdaBh { r, .. } => Some(*r),
            _ => None,
        }
    }

    /// The null-proportion estimate behind an adaptive-BH collection.
    pub fn pi0(&self) -> Option<f64> {
        match &self.source {
            Source::AdaBh { pi0, .. } => Some(*pi0),
            _ => None,
        }
    }

    pub(crate) fn source(&self) -> &Source {
        &self.source
    }

    /// Hypotheses ordered from most to least harmful for `e_S`.
    ///
    /// Defined for collections where `e_S` is a symmetric function of
    /// per-hypothesis scores that is monotone in each score; then for fixed
    /// `|S ∩ R|` and `|S \ R|` the smallest `e_S` is attained by taking the
    /// first hypotheses of this order inside and outside `R`.
    pub fn worst_case_order(&self) -> Option<Vec<usize>> {
        if self.feasible.is_some() {
            return None;
        }
        match &self.source {
            Source::Mean { e } | Source::Product { e } | Source::Compound { e } => Some(ascending_order(e)),
            Source::Bh { base, .. } | Source::AdaBh { base, .. } => Some(ascending_order(base)),
            Source::By { p, .. } | Source::Su { p, .. } => Some(descending_order(p)),
            Source::Knockoff { stats, .. } => {
                let rank = |i: usize| {
                    if stats.negative.contains(i) {
                        0
                    } else if stats.positive.contains(i) {
                        2
                    } else {
                        1
                    }
                };
                let mut idx: Vec<usize> = (0..self.m).collect();
                idx.sort_by_key(|&i| (rank(i), i));
                Some(idx)
            }
            Source::Boosted { base, .. } => base.worst_case_order(),
            Source::Procedure { .. } | Source::Table { .. } => None,
        }
    }

    pub fn builder_name(&self) -> &'static str {
        match &self.source {
            Source::Mean { .. } => "mean",
            Source::Product { .. } => "product",
            Source::Compound { .. } => "compound",
            Source::By { .. } => "by",
            Source::Su { .. } => "su",
            Source::Bh { .. } => "bh",
            Source::AdaBh { .. } => "storey_adabh",
            Source::Knockoff { .. } => "knockoff",
            Source::Procedure { .. } => "procedure",
            Source::Table { .. } => "table",
            Source::Boosted { .. } => "boosted",
        }
    }

    /// Builder name and parameters, in canonical JSON form.
    pub fn descriptor(&self) -> Value {
        let reals = |v: &[f64]| v.iter().map(|&x| ExtReal(x)).collect::<Vec<_>>();
        let mut d = match &self.source {
            Source::Mean { e } | Source::Product { e } | Source::Compound { e } => json!({ "e": reals(e) }),
            Source::By { p, alpha, .. } => json!({ "p": reals(p), "alpha": alpha }),
            Source::Su { p, su } => json!({ "p": reals(p), "alpha": su.alpha }),
            Source::Bh { p, alpha, .. } => json!({ "p": reals(p), "alpha": alpha }),
            Source::AdaBh { p, alpha, lambda, .. } => json!({ "p": reals(p), "alpha": alpha, "lambda": lambda }),
            Source::Knockoff { stats, alpha } => json!({ "w": reals(&stats.w), "alpha": alpha }),
            Source::Procedure { family, loss, alpha } => json!({ "family": family, "loss": loss, "alpha": alpha }),
            Source::Table { label, values } => json!({ "label": label, "values": reals(values) }),
            Source::Boosted { base, alpha, factors, .. } => {
                json!({ "base": base.descriptor(), "alpha": alpha, "factors": reals(factors) })
            }
        };
        d["builder"] = json!(self.builder_name());
        d["m"] = json!(self.m);
        if let Some(f) = &self.feasible {
            d["feasible"] = f.describe();
        }
        d
    }

    /// SHA-256 of the descriptor, hex encoded.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(&self.descriptor()).expect("descriptor serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// How an additive collection normalises its sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Divisor {
    /// Divide by `|S|`.
    Size,
    /// Divide by `m`.
    M,
}

fn sum_over(v: &[f64], s: Subset) -> f64 {
    s.iter().map(|i| v[i]).sum()
}

fn product_over(v: &[f64], s: Subset) -> f64 {
    if s.iter().any(|i| v[i] == 0.0) {
        return 0.0;
    }
    if s.iter().any(|i| v[i].is_infinite()) {
        return f64::INFINITY;
    }
    s.iter().map(|i| v[i].ln()).sum::<f64>().exp()
}

/// `e_S = (Σ_{i∈S} e_i)/|S|`.
pub fn mean_collection(e: &ValueVector) -> Result<ECollection> {
    let e = e.expect(ValueKind::Evalue)?.to_vec();
    let flags = Flags { alpha_independent: true, monotone_in_p: false, mean_type: true };
    Ok(ECollection::new(e.len(), Source::Mean { e }, flags))
}

/// `e_S = Π_{i∈S} e_i`, computed in log space. Valid under independence.
pub fn product_collection(e: &ValueVector) -> Result<ECollection> {
    let e = e.expect(ValueKind::Evalue)?.to_vec();
    let flags = Flags { alpha_independent: true, ..Flags::default() };
    Ok(ECollection::new(e.len(), Source::Product { e }, flags))
}

/// `e_S = (1/m)·Σ_{i∈S} ẽ_i` for compound e-values `ẽ`.
pub fn compound_to_collection(e: &ValueVector) -> Result<ECollection> {
    let e = e.expect(ValueKind::Evalue)?.to_vec();
    let flags = Flags { alpha_independent: true, ..Flags::default() };
    Ok(ECollection::new(e.len(), Source::Compound { e }, flags))
}

/// BY local e-values: the BY calibrator at size `|S|`, averaged over `S`.
pub fn by_collection(p: &ValueVector, alpha: f64) -> Result<ECollection> {
    check_alpha(alpha)?;
    let p = p.expect(ValueKind::Pvalue)?.to_vec();
    let h = HarmonicTable::new(p.len());
    let flags = Flags { monotone_in_p: true, ..Flags::default() };
    Ok(ECollection::new(p.len(), Source::By { p, alpha, h }, flags))
}

/// Su local e-values: the Su calibrator applied to the Simes combination.
pub fn su_collection(p: &ValueVector, alpha: f64) -> Result<ECollection> {
    let su = SuConstants::new(alpha)?;
    let p = p.expect(ValueKind::Pvalue)?.to_vec();
    let flags = Flags { monotone_in_p: true, ..Flags::default() };
    Ok(ECollection::new(p.len(), Source::Su { p, su }, flags))
}

/// BH local e-values: the mean over `S` of `m/(α(r∨1))·1{p_i ≤ α(r∨1)/m}`
/// with `r` the BH rejection count.
pub fn bh_collection(p: &ValueVector, alpha: f64) -> Result<ECollection> {
    check_alpha(alpha)?;
    let p = p.expect(ValueKind::Pvalue)?.to_vec();
    let m = p.len();
    let r = bh_count(&p, alpha / m as f64);
    let base = threshold_evalues(&p, alpha, r, 1.0);
    let flags = Flags { mean_type: true, ..Flags::default() };
    Ok(ECollection::new(m, Source::Bh { p, alpha, r, base }, flags))
}

/// Adaptive-BH local e-values with the Storey null-proportion estimate.
///
/// `π̂₀ = max_i π̂(p with p_i set to 0)` where
/// `π̂ = (1 + #{p > λ})/(m(1 − λ))`; the rejection count uses threshold
/// `α·i/(π̂₀·m)` and base e-values are
/// `m/(α(r∨1))·1{p_i ≤ α(r∨1)/(m π̂₀)}`.
pub fn storey_adabh_collection(p: &ValueVector, alpha: f64, lambda: f64) -> Result<ECollection> {
    check_alpha(alpha)?;
    let p = p.expect(ValueKind::Pvalue)?.to_vec();
    let m = p.len();
    let pi0 = storey_pi0(&p, lambda)?;
    let r = bh_count(&p, alpha / (pi0 * m as f64));
    let base = threshold_evalues(&p, alpha, r, pi0);
    let flags = Flags { mean_type: true, ..Flags::default() };
    Ok(ECollection::new(m, Source::AdaBh { p, alpha, lambda, pi0, r, base }, flags))
}

fn threshold_evalues(p: &[f64], alpha: f64, r: usize, pi0: f64) -> Vec<f64> {
    let m = p.len() as f64;
    let rr = r.max(1) as f64;
    let value = m / (alpha * rr);
    let cut = alpha * rr / (m * pi0);
    let policy = ComparePolicy::default();
    p.iter().map(|&x| if policy.le(x, cut) { value } else { 0.0 }).collect()
}

/// Knockoff local e-values `Σ_S 1{w_i ≥ c_α} / (1 + Σ_S 1{w_j ≤ −c_α})`.
pub fn knockoff_collection(w: &ValueVector, alpha: f64) -> Result<ECollection> {
    check_alpha(alpha)?;
    let w = w.expect(ValueKind::KnockoffStat)?;
    let stats = KnockoffStats::new(w, alpha);
    Ok(ECollection::new(w.len(), Source::Knockoff { stats, alpha }, Flags::default()))
}

/// `e_S = max_{R ∈ family} f_S(R)/α`, the collection induced by a procedure.
pub fn from_procedure_collection(
    m: usize,
    family: &[Subset],
    loss: &LossFunction,
    alpha: f64,
) -> Result<ECollection> {
    check_alpha(alpha)?;
    loss.validate()?;
    if family.is_empty() {
        return Err(Error::Domain("procedure family must not be empty".into()));
    }
    for r in family {
        r.check_fits(m)?;
    }
    let mut family = family.to_vec();
    family.sort();
    family.dedup();
    let source = Source::Procedure { family, loss: loss.clone(), alpha };
    Ok(ECollection::new(m, source, Flags::default()))
}

/// An explicit table of `e_S`, indexed by bitmask (`values[0]` is unused).
pub fn table_collection(m: usize, values: Vec<f64>, label: impl Into<String>) -> Result<ECollection> {
    if m == 0 || m > 24 {
        return Err(Error::InvalidCount { m, max: 24 });
    }
    if values.len() != 1usize << m {
        return Err(Error::Domain(format!("table needs {} entries, got {}", 1usize << m, values.len())));
    }
    if let Some(bad) = values.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!("table entry {bad} is negative or NaN")));
    }
    let source = Source::Table { label: label.into(), values: Arc::new(values) };
    Ok(ECollection::new(m, source, Flags { alpha_independent: true, ..Flags::default() }))
}

/// `T_{|S|}(b_{|S|}·e_S)`: each `e_S` scaled by a size-dependent factor and
/// truncated to the grid for that size.
pub fn boosted_collection(base: &ECollection, alpha: f64, grids: Vec<TruncationGrid>, factors: Vec<f64>) -> Result<ECollection> {
    check_alpha(alpha)?;
    let m = base.m();
    if grids.len() != m || factors.len() != m {
        return Err(Error::Domain("boosting needs one grid and one factor per set size".into()));
    }
    if let Some(b) = factors.iter().find(|b| !(**b >= 1.0)) {
        return Err(Error::Domain(format!("boosting factors must be at least 1, got {b}")));
    }
    let flags = Flags { monotone_in_p: base.flags().monotone_in_p, ..Flags::default() };
    let feasible = base.feasible.clone();
    let source = Source::Boosted { base: Box::new(base.clone()), alpha, grids, factors };
    Ok(ECollection { m, source, flags, feasible })
}

/// `base` with `e_S = +∞` whenever `S` is not a feasible null set.
pub fn restrict_feasible(base: &ECollection, feasible: Feasibility) -> ECollection {
    let mut c = base.clone();
    c.feasible = Some(feasible);
    c
}
