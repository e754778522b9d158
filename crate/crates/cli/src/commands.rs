//! The `run`, `compare`, `query` and `figure` commands as library calls.

use std::time::Instant;

use eclosure_core::procedures::{self, RunOptions};
use eclosure_core::shortcuts::{critical_alpha_auto, greedy_boundary_ebh, member_auto, true_discovery_bound_auto};
use eclosure_core::values::{ascending_order, descending_order};
use eclosure_core::{Engine, LossFunction, MembershipCertificate, Method, Subset, ValueKind, ValueVector};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::input::to_csv;
use crate::record::{Format, ResultRecord};

/// Ascending p-values, or descending e-values and knockoff statistics.
pub fn natural_order(v: &ValueVector) -> Vec<usize> {
    match v.kind() {
        ValueKind::Pvalue => ascending_order(v.values()),
        _ => descending_order(v.values()),
    }
}

/// Runs `method`. With `exhaustive`, a closed method reports a member of
/// maximum size over all subsets rather than the longest member prefix.
pub fn run(
    engine: &Engine,
    method: Method,
    values: &ValueVector,
    alpha: f64,
    opts: &RunOptions,
    exhaustive: bool,
) -> Result<ResultRecord> {
    let start = Instant::now();
    let mut result = procedures::run(method, values, alpha, opts)?;
    if exhaustive && method != Method::Eholm {
        if let Some(c) = result.collection.clone() {
            result.rejected = engine.largest_member(&c, &LossFunction::Fdp, alpha, &natural_order(values), true)?;
            result.diagnostics.r = result.rejected.len();
        }
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(ResultRecord::new(&result, values.m(), ms))
}

/// The classical/closed pairs that apply to a kind of input.
pub fn default_pairs(kind: ValueKind) -> Vec<(Method, Method)> {
    match kind {
        ValueKind::Pvalue => vec![
            (Method::Bh, Method::ClosedBh),
            (Method::By, Method::ClosedBy),
            (Method::Su, Method::ClosedSu),
            (Method::StoreyBh, Method::ClosedAdabh),
        ],
        ValueKind::Evalue => vec![(Method::Ebh, Method::ClosedEbh), (Method::MaEbh, Method::ClosedEbh)],
        ValueKind::KnockoffStat => vec![(Method::Knockoff, Method::ClosedKnockoff)],
    }
}

/// Pairs each classical method with its closed counterpart.
pub fn pairs_for(methods: &[Method]) -> Result<Vec<(Method, Method)>> {
    methods
        .iter()
        .map(|&m| match m {
            Method::MaEbh => Ok((m, Method::ClosedEbh)),
            _ => m
                .closed()
                .map(|c| (m, c))
                .ok_or_else(|| CliError::Input(format!("{m} has no closed counterpart to compare with"))),
        })
        .collect()
}

/// Discovery counts, one row per α and two columns per pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareTable {
    pub m: usize,
    pub pairs: Vec<(Method, Method)>,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub alpha: f64,
    pub counts: Vec<(usize, usize)>,
}

pub fn compare(values: &ValueVector, alphas: &[f64], pairs: &[(Method, Method)], opts: &RunOptions) -> Result<CompareTable> {
    if alphas.is_empty() || pairs.is_empty() {
        return Err(CliError::Input("compare needs at least one alpha and one method".into()));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut counts = Vec::with_capacity(pairs.len());
        for &(classical, closed) in pairs {
            let a = procedures::run(classical, values, alpha, opts)?.rejected.len();
            let b = procedures::run(closed, values, alpha, opts)?.rejected.len();
            counts.push((a, b));
        }
        rows.push(CompareRow { alpha, counts });
    }
    Ok(CompareTable { m: values.m(), pairs: pairs.to_vec(), rows })
}

impl CompareTable {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["alpha".to_string()];
        for (a, b) in &self.pairs {
            h.push(a.to_string());
            h.push(b.to_string());
        }
        h
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.alpha.to_string()];
                for (a, b) in &r.counts {
                    row.push(a.to_string());
                    row.push(b.to_string());
                }
                row
            })
            .collect()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        let header = self.header();
        let cells = self.cells();
        Ok(match format {
            Format::Json => serde_json::to_string(self)? + "\n",
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&header)?;
                for row in &cells {
                    w.write_record(row)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8")
            }
            Format::Text => {
                let widths: Vec<usize> = (0..header.len())
                    .map(|j| cells.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
                    .collect();
                let line = |row: &[String]| {
                    let parts: Vec<String> = row
                        .iter()
                        .zip(&widths)
                        .enumerate()
                        .map(|(j, (c, &w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                        .collect();
                    parts.join("  ").trim_end().to_string() + "\n"
                };
                let mut s = format!("m = {}\n", self.m);
                s.push_str(&line(&header));
                for row in &cells {
                    s.push_str(&line(row));
                }
                s
            }
        })
    }
}

/// Membership of one set, with the simultaneous true-discovery bound and,
/// for α-free collections, the smallest level at which the set is a member.
#[derive(Debug, Clone, Serialize)]
pub struct QueryReport {
    pub method: Method,
    pub alpha: f64,
    pub loss: LossFunction,
    pub set: Subset,
    pub certificate: MembershipCertificate,
    pub true_discovery_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Answers a membership query against the collection of a closed `method`.
/// With `require_critical`, an α-dependent collection is an error.
#[allow(clippy::too_many_arguments)]
pub fn query(
    engine: &Engine,
    method: Method,
    values: &ValueVector,
    alpha: f64,
    loss: LossFunction,
    set: Subset,
    opts: &RunOptions,
    require_critical: bool,
) -> Result<QueryReport> {
    set.check_fits(values.m())?;
    let result = procedures::run(method, values, alpha, opts)?;
    let c = result
        .collection
        .ok_or_else(|| CliError::Input(format!("{method} is not a closed method; query needs one of the closed-* methods")))?;
    let certificate = member_auto(engine, &c, &loss, alpha, set)?;
    let true_discovery_bound = true_discovery_bound_auto(engine, &c, alpha, set)?;
    let (critical_alpha, note) = if c.flags().alpha_independent {
        (Some(critical_alpha_auto(engine, &c, &loss, set)?), None)
    } else {
        let msg = format!(
            "{method} builds its e-values from alpha, so membership at another level is not covered by this collection and no critical alpha is reported"
        );
        if require_critical {
            return Err(CliError::Input(msg));
        }
        (None, Some(msg))
    };
    Ok(QueryReport { method, alpha, loss, set, certificate, true_discovery_bound, critical_alpha, note })
}

impl QueryReport {
    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string(self)? + "\n",
            Format::Csv => format!(
                "method,alpha,loss,set,member,witness,true_discovery_bound,critical_alpha\n{},{},{},{},{},{},{},{}\n",
                self.method,
                self.alpha,
                self.loss,
                join(self.set),
                self.certificate.member,
                self.certificate.witness.map(join).unwrap_or_default(),
                self.true_discovery_bound,
                self.critical_alpha.map(|a| a.to_string()).unwrap_or_default()
            ),
            Format::Text => {
                let verdict = if self.certificate.member { "is" } else { "is not" };
                let mut s = format!("{{{}}} {verdict} a member for {} at alpha {}\n", join(self.set), self.loss, self.alpha);
                if let Some(w) = self.certificate.witness {
                    s.push_str(&format!("  witness S = {{{}}}\n", join(w)));
                }
                s.push_str(&format!("  at least {} true discoveries\n", self.true_discovery_bound));
                match (self.critical_alpha, &self.note) {
                    (Some(a), _) => s.push_str(&format!("  critical alpha {a}\n")),
                    (None, Some(n)) => s.push_str(&format!("  {n}\n")),
                    _ => {}
                }
                s
            }
        })
    }
}

fn join(s: Subset) -> String {
    s.to_one_based().iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Parses a comma-separated list of 1-based indices.
pub fn parse_set(spec: &str, m: usize) -> Result<Subset> {
    let ix = spec
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<usize>().map_err(|_| CliError::Input(format!("bad index '{p}' in set"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Subset::from_one_based(&ix, m)?)
}

/// The greedy boundary profile for the closed mean collection, as an
/// `index,value` CSV that `run` reads back.
pub fn figure_fig1(k: usize, m: usize, alpha: f64) -> Result<String> {
    Ok(to_csv(&greedy_boundary_ebh(k, m, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_evalues() -> ValueVector {
        ValueVector::evalues((1..=20).map(|i| 41.0 - 2.0 * i as f64).collect()).unwrap()
    }

    #[test]
    fn run_examples() {
        let e = Engine::default();
        let rec = run(&e, Method::ClosedEbh, &linear_evalues(), 0.05, &RunOptions::default(), false).unwrap();
        assert_eq!(rec.rejected, (1..=20).collect::<Vec<_>>());
        let rec = run(&e, Method::Ebh, &linear_evalues(), 0.05, &RunOptions::default(), false).unwrap();
        assert!(rec.rejected.is_empty());
        let ones = ValueVector::pvalues(vec![1.0; 7]).unwrap();
        assert!(run(&e, Method::By, &ones, 0.05, &RunOptions::default(), false).unwrap().rejected.is_empty());
        assert!(run(&e, Method::By, &linear_evalues(), 0.05, &RunOptions::default(), false).is_err());
    }

    #[test]
    fn compare_table_layout() {
        let p = ValueVector::pvalues(vec![0.0001, 0.013, 0.019, 0.021, 0.044, 0.052, 0.074, 0.124, 0.486, 0.661, 0.848]).unwrap();
        let t = compare(&p, &[0.05, 0.2], &default_pairs(ValueKind::Pvalue), &RunOptions::default()).unwrap();
        assert_eq!(t.rows[1].counts[0], (8, 8));
        let csv = t.render(Format::Csv).unwrap();
        assert!(csv.starts_with("alpha,bh,closed-bh,by,closed-by,"));
        assert_eq!(csv.lines().count(), 3);
        let text = t.render(Format::Text).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(pairs_for(&[Method::ClosedBy]).is_err());
    }

    #[test]
    fn query_examples() {
        let e = Engine::default();
        let opts = RunOptions::default();
        let w = ValueVector::knockoff(vec![6.0, 5.0, 4.0, 3.0, -2.0, -1.0]).unwrap();
        let q = query(&e, Method::ClosedKnockoff, &w, 0.4, LossFunction::Fdp, parse_set("1,2,3", 6).unwrap(), &opts, false)
            .unwrap();
        assert!(q.certificate.member);
        assert!(q.critical_alpha.is_none() && q.note.is_some());
        assert!(query(&e, Method::ClosedKnockoff, &w, 0.4, LossFunction::Fdp, Subset::EMPTY, &opts, true).is_err());

        let v = ValueVector::evalues(vec![30.0, 10.0, 0.0]).unwrap();
        let q = query(&e, Method::ClosedEbh, &v, 0.05, LossFunction::Fdp, parse_set("1", 3).unwrap(), &opts, true).unwrap();
        assert!((q.critical_alpha.unwrap() - 0.075).abs() < 1e-12);
        let q = query(&e, Method::ClosedEbh, &v, 0.05, LossFunction::Fdp, parse_set("3", 3).unwrap(), &opts, false).unwrap();
        assert!(!q.certificate.member);
        assert_eq!(q.certificate.witness, Some(parse_set("3", 3).unwrap()));
        assert!(parse_set("4", 3).is_err());
        assert!(query(&e, Method::Ebh, &v, 0.05, LossFunction::Fdp, Subset::EMPTY, &opts, false).is_err());
    }

    #[test]
    fn figure_rows() {
        let csv = figure_fig1(7, 20, 0.05).unwrap();
        let rows: Vec<(usize, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let (i, v) = l.split_once(',').unwrap();
                (i.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 20);
        assert!((rows[6].1 - 40.0).abs() < 1e-9);
        assert!((rows[5].1 - 45.714).abs() < 1e-3);
        assert!(figure_fig1(21, 20, 0.05).is_err());
    }
}
