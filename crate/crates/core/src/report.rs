//! Verification reports with a bounded list of witnesses.

use serde::{Deserialize, Serialize};
use serde_json::Value;

const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub witness: Value,
}

/// Outcome of checking a finite certificate. `rim_censored` counts
/// would-be failures at points too close to the window rim to decide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub passed: bool,
    pub checks: u64,
    pub rim_censored: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

impl Default for Report {
    fn default() -> Self {
        Report { passed: true, checks: 0, rim_censored: 0, violation_count: 0, violations: Vec::new() }
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self) {
        self.checks += 1;
    }

    pub fn fail(&mut self, check: &str, witness: Value) {
        self.passed = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_WITNESSES {
            self.violations.push(Violation { check: check.to_string(), witness });
        }
    }

    pub fn censor(&mut self) {
        self.rim_censored += 1;
    }

    pub fn merge(&mut self, other: Report) {
        self.passed &= other.passed;
        self.checks += other.checks;
        self.rim_censored += other.rim_censored;
        self.violation_count += other.violation_count;
        for v in other.violations {
            if self.violations.len() < MAX_WITNESSES {
                self.violations.push(v);
            }
        }
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

pub(crate) fn witness<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}
