//! Result records and their text, CSV and JSON-lines renderings.

use clap::ValueEnum;
use eclosure_core::procedures::{Diagnostics, ProcedureResult};
use eclosure_core::Method;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// One procedure run. Serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: Method,
    pub alpha: f64,
    pub m: usize,
    /// 1-based, ascending.
    pub rejected: Vec<usize>,
    pub diagnostics: Diagnostics,
    pub runtime_ms: f64,
}

impl ResultRecord {
    pub fn new(result: &ProcedureResult, m: usize, runtime_ms: f64) -> Self {
        ResultRecord {
            method: result.method,
            alpha: result.alpha,
            m,
            rejected: result.rejected.to_one_based(),
            diagnostics: result.diagnostics.clone(),
            runtime_ms,
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line.trim())?)
    }

    fn joined(&self, sep: &str) -> String {
        self.rejected.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => self.to_json_line()?,
            Format::Csv => format!(
                "method,alpha,m,count,rejected,runtime_ms\n{},{},{},{},{},{}\n",
                self.method,
                self.alpha,
                self.m,
                self.rejected.len(),
                self.joined(" "),
                self.runtime_ms
            ),
            Format::Text => {
                let mut s = format!(
                    "{} at alpha {} rejects {} of {}: {{{}}}\n",
                    self.method,
                    self.alpha,
                    self.rejected.len(),
                    self.m,
                    self.joined(", ")
                );
                let d = &self.diagnostics;
                for (name, v) in [("c_alpha", d.c_alpha), ("pi0", d.pi0), ("ell", d.ell)] {
                    if let Some(v) = v {
                        s.push_str(&format!("  {name} = {v}\n"));
                    }
                }
                s.push_str(&format!("  runtime {:.3} ms\n", self.runtime_ms));
                s
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_round_trip() {
        let rec = ResultRecord {
            method: Method::ClosedKnockoff,
            alpha: 0.1 + 0.2,
            m: 6,
            rejected: vec![1, 2, 4],
            diagnostics: Diagnostics { r: 3, c_alpha: Some(1.0 / 3.0), pi0: None, ell: None },
            runtime_ms: 0.123456789,
        };
        let line = rec.to_json_line().unwrap();
        assert!(line.ends_with('\n') && !line.trim_end().contains('\n'));
        assert_eq!(ResultRecord::from_json_line(&line).unwrap(), rec);
        assert!(rec.render(Format::Csv).unwrap().contains(",1 2 4,"));
    }
}
