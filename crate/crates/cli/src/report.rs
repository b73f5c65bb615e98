//! Machine-readable reports: assertion id -> status, expected, computed, provenance, runtime.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use hecke_core::report::{Check, Source};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "hecke-lab-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub status: Status,
    pub expected: String,
    pub computed: String,
    pub provenance: Source,
    /// Wall time of the computation that produced the assertion.
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub summary: Summary,
    pub warnings: Vec<String>,
    pub assertions: BTreeMap<String, Assertion>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            summary: Summary::default(),
            warnings: vec![],
            assertions: BTreeMap::new(),
            data: serde_json::Value::Null,
        }
    }

    /// Add checks under `prefix`, all charged with the same runtime.
    pub fn add(&mut self, prefix: &str, checks: &[Check], runtime_ms: f64) {
        for c in checks {
            let id = if prefix.is_empty() {
                c.id.clone()
            } else {
                format!("{prefix}.{}", c.id)
            };
            let a = Assertion {
                status: if c.passed { Status::Pass } else { Status::Fail },
                expected: c.expected.clone(),
                computed: c.computed.clone(),
                provenance: c.source,
                runtime_ms,
                detail: c.detail.clone(),
            };
            if let Some(old) = self.assertions.insert(id.clone(), a) {
                // keep the failing record if an id repeats
                if old.status == Status::Fail {
                    self.assertions.insert(id, old);
                }
            }
        }
        self.refresh();
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        eprintln!("warning: {w}");
        self.warnings.push(w);
    }

    fn refresh(&mut self) {
        let passed = self.assertions.values().filter(|a| a.status == Status::Pass).count();
        self.summary = Summary {
            total: self.assertions.len(),
            passed,
            failed: self.assertions.len() - passed,
        };
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> Vec<&str> {
        self.assertions
            .iter()
            .filter(|(_, a)| a.status == Status::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Write {
            path: path.display().to_string(),
            source: e,
        })
    }

    /// The report with runtimes zeroed, for comparing runs.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        for a in r.assertions.values_mut() {
            a.runtime_ms = 0.0;
        }
        strip_timing(&mut r.data);
        r
    }
}

fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if k == "seconds" || k == "runtime_ms" {
                    *x = serde_json::Value::Null;
                } else {
                    strip_timing(x);
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
