use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use kappa_core::io::{ComplexPairs, ObjectSpec};
use kappa_core::selftest::SuiteResult;

use crate::job::{JobSpec, Quantity};

pub const SCHEMA: &str = "kappa-cost/1";

/// Relative tolerance for closed-form agreement flags.
pub const AGREEMENT_TOL: f64 = 1e-5;

pub fn agrees(sdp: f64, closed: f64) -> bool {
    (sdp - closed).abs() <= AGREEMENT_TOL * closed.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Parse,
    Dimension,
    Solver,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityError {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QuantityResult {
    pub quantity: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_bits: Option<f64>,
    /// Qualifier for non-numeric or conjectural values (`zero`, `infinite`, `conjecture`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<BTreeMap<String, ComplexPairs>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<QuantityError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    /// One entry per requested quantity, `None` where it failed.
    pub values: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub tool: String,
    pub core: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            tool: env!("CARGO_PKG_VERSION").to_string(),
            core: kappa_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub job: JobSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<ObjectSpec>,
    #[serde(default)]
    pub results: Vec<QuantityResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selftest: Option<Vec<SuiteResult>>,
    pub versions: Versions,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(job: JobSpec) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            job,
            input: None,
            results: Vec::new(),
            sweep_columns: None,
            sweep: None,
            selftest: None,
            versions: Versions::default(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report holds only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let (Some(cols), Some(rows)) = (&self.sweep_columns, &self.sweep) {
            let has_err = rows.iter().any(|r| r.error.is_some());
            out.push_str(&cols.join(","));
            if has_err {
                out.push_str(",error");
            }
            out.push('\n');
            for r in rows {
                let mut cells = vec![r.param.to_string()];
                cells.extend(r.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
                if has_err {
                    cells.push(csv_text(r.error.as_deref().unwrap_or("")));
                }
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        } else if let Some(suites) = &self.selftest {
            out.push_str("suite,passed,total\n");
            for s in suites {
                out.push_str(&format!("{},{},{}\n", s.name, s.passed, s.total));
            }
        } else {
            out.push_str("quantity,value_bits,closed_form_bits,agrees,error\n");
            for r in &self.results {
                let cells = [
                    r.quantity.map(|q| q.name().to_string()).unwrap_or_default(),
                    r.value_bits.map(|v| v.to_string()).unwrap_or_default(),
                    r.closed_form_bits.map(|v| v.to_string()).unwrap_or_default(),
                    r.agrees.map(|v| v.to_string()).unwrap_or_default(),
                    csv_text(r.error.as_ref().map(|e| e.message.as_str()).unwrap_or("")),
                ];
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// Plain-text table of self-test suites.
    pub fn selftest_table(&self) -> String {
        let mut out = String::new();
        let Some(suites) = &self.selftest else {
            return out;
        };
        let width = suites.iter().map(|s| s.name.len()).max().unwrap_or(5).max(5);
        out.push_str(&format!("{:<width$}  passed/total  status\n", "suite"));
        for s in suites {
            let status = if s.ok() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {:>6}/{:<5}  {status}\n", s.name, s.passed, s.total));
            for f in &s.failures {
                out.push_str(&format!("    {f}\n"));
            }
        }
        out
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
