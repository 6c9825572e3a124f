use std::fmt::Write as _;

use serde_json::Value;

use crate::numfmt::sig;

/// One failed check. `margin = bound - value`, negative on failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: String,
    pub params: Value,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Outcome of a sweep: how many checks ran, the tightest margin seen, and
/// every check with `value > bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: String,
    pub checks: usize,
    pub min_margin: f64,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Report { suite: suite.into(), checks: 0, min_margin: f64::INFINITY, violations: Vec::new() }
    }

    /// Records `value ≤ bound`.
    pub fn check(&mut self, check: &str, params: impl FnOnce() -> Value, value: f64, bound: f64) {
        self.checks += 1;
        let margin = bound - value;
        // NaN counts as a failure
        if margin.is_nan() || margin < 0.0 {
            self.violations.push(Violation { check: check.to_string(), params: params(), value, bound, margin });
        }
        if margin.is_nan() {
            self.min_margin = f64::NEG_INFINITY;
        } else {
            self.min_margin = self.min_margin.min(margin);
        }
    }

    /// Folds another partial report of the same suite into this one.
    pub fn merge(&mut self, other: Report) {
        self.checks += other.checks;
        self.min_margin = self.min_margin.min(other.min_margin);
        self.violations.extend(other.violations);
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Failures only; a header and nothing else means success.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,param_json,value,bound,margin\n");
        for v in &self.violations {
            let json = v.params.to_string().replace('"', "\"\"");
            writeln!(out, "{},\"{}\",{},{},{}", v.check, json, sig(v.value, 15), sig(v.bound, 15), sig(v.margin, 15))
                .expect("write to string");
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "suite={} checks={} violations={} min_margin={}",
            self.suite,
            self.checks,
            self.violations.len(),
            sig(self.min_margin, 6)
        )
    }
}
