//! Assertion records shared by the algebra, representation and classical audits.

use serde::{Deserialize, Serialize};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A published identity, checked as stated.
    Stated,
    /// Follows directly from the definitions.
    Definitional,
    /// Produced by an independent computation in this project.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub expected: String,
    pub computed: String,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(id: String, passed: bool, expected: String, computed: String, source: Source) -> Self {
        Check {
            id,
            passed,
            expected,
            computed,
            source,
            detail: None,
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
