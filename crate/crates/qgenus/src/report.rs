//! Structured pass/fail records for the verification drivers.
//!
//! Every check is tied to the equation it verifies; a run aggregates entries
//! into a deterministic report (sorted by check id) that serializes to JSON
//! with all coefficients as exact rational strings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of one check.
///
/// `PaperDiscrepancy` marks an internally consistent identity whose printed
/// source constant disagrees with the engine's derived value; it is reported
/// but does not fail a run.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "skip")]
    Skip,
    #[serde(rename = "paper-discrepancy")]
    PaperDiscrepancy,
    #[serde(rename = "fail")]
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Skip => "skip",
            Status::PaperDiscrepancy => "paper-discrepancy",
            Status::Fail => "fail",
        };
        write!(f, "{}", s)
    }
}

/// One compared quantity inside a check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Detail {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub status: Status,
}

impl Detail {
    pub fn compared(name: impl Into<String>, expected: impl fmt::Display, got: impl fmt::Display) -> Self {
        let expected = expected.to_string();
        let got = got.to_string();
        let status = if expected == got { Status::Pass } else { Status::Fail };
        Detail {
            name: name.into(),
            expected,
            got,
            status,
        }
    }

    pub fn observed(name: impl Into<String>, got: impl fmt::Display) -> Self {
        Detail {
            name: name.into(),
            expected: String::new(),
            got: got.to_string(),
            status: Status::Pass,
        }
    }

    pub fn bool_check(name: impl Into<String>, ok: bool, got: impl fmt::Display) -> Self {
        Detail {
            name: name.into(),
            expected: "true".to_string(),
            got: got.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    /// A printed-constant comparison that downgrades a mismatch to
    /// paper-discrepancy instead of failure.
    pub fn printed_constant(name: impl Into<String>, printed: impl fmt::Display, derived: impl fmt::Display) -> Self {
        let expected = printed.to_string();
        let got = derived.to_string();
        let status = if expected == got {
            Status::Pass
        } else {
            Status::PaperDiscrepancy
        };
        Detail {
            name: name.into(),
            expected,
            got,
            status,
        }
    }
}

/// One verified identity, with parameters and per-quantity details.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check_id: String,
    pub paper_ref: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub details: Vec<Detail>,
}

impl CheckEntry {
    pub fn new(check_id: impl Into<String>, paper_ref: impl Into<String>) -> Self {
        CheckEntry {
            check_id: check_id.into(),
            paper_ref: paper_ref.into(),
            params: BTreeMap::new(),
            status: Status::Pass,
            details: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, detail: Detail) {
        self.status = self.status.max(detail.status);
        self.details.push(detail);
    }

    pub fn skip(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skip;
        self.details.push(Detail {
            name: "skipped".to_string(),
            expected: String::new(),
            got: reason.into(),
            status: Status::Skip,
        });
        self
    }

    pub fn first_failure(&self) -> Option<&Detail> {
        self.details.iter().find(|d| d.status == Status::Fail)
    }
}

/// Aggregated result of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn set_config(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.config.insert(key.into(), value.to_string());
    }

    pub fn add(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = CheckEntry>) {
        self.checks.extend(entries);
    }

    /// Deterministic order regardless of how checks were dispatched.
    pub fn normalize(&mut self) {
        self.checks.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering: one line per check, mismatching details
    /// spelled out for anything that is not a plain pass.
    pub fn human_readable(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let badge = match check.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::PaperDiscrepancy => "NOTE",
                Status::Skip => "SKIP",
            };
            let params = if check.params.is_empty() {
                String::new()
            } else {
                let kv: Vec<String> = check.params.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
                format!(" [{}]", kv.join(", "))
            };
            out.push_str(&format!("[{}] {} ({}){}\n", badge, check.check_id, check.paper_ref, params));
            for d in &check.details {
                match d.status {
                    // observed values (no expectation) are informational
                    Status::Pass if d.expected.is_empty() => {
                        out.push_str(&format!("       {} = {}\n", d.name, d.got));
                    }
                    Status::Pass => {}
                    Status::Skip => {
                        out.push_str(&format!("       skipped: {}\n", d.got));
                    }
                    Status::PaperDiscrepancy => {
                        out.push_str(&format!(
                            "       note: {} printed {} but engine derives {}\n",
                            d.name, d.expected, d.got
                        ));
                    }
                    Status::Fail => {
                        out.push_str(&format!(
                            "       mismatch: {} expected {} got {}\n",
                            d.name, d.expected, d.got
                        ));
                    }
                }
            }
        }
        let passed = self.count(Status::Pass);
        let failed = self.count(Status::Fail);
        let notes = self.count(Status::PaperDiscrepancy);
        let skipped = self.count(Status::Skip);
        out.push_str(&format!(
            "{} checks: {} passed, {} failed, {} with notes, {} skipped\n",
            self.checks.len(),
            passed,
            failed,
            notes,
            skipped
        ));
        out
    }
}

impl Default for VerificationReport {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_worsens_monotonically() {
        let mut entry = CheckEntry::new("x", "Eq. 0.0");
        entry.push(Detail::compared("a", 1, 1));
        assert_eq!(entry.status, Status::Pass);
        entry.push(Detail::printed_constant("b", 2, 3));
        assert_eq!(entry.status, Status::PaperDiscrepancy);
        entry.push(Detail::compared("c", 4, 5));
        assert_eq!(entry.status, Status::Fail);
    }

    #[test]
    fn report_orders_by_check_id() {
        let mut report = VerificationReport::new();
        report.add(CheckEntry::new("b", ""));
        report.add(CheckEntry::new("a", ""));
        report.normalize();
        let ids: Vec<&str> = report.checks.iter().map(|c| c.check_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn paper_discrepancy_does_not_fail_runs() {
        let mut report = VerificationReport::new();
        let mut entry = CheckEntry::new("x", "");
        entry.push(Detail::printed_constant("k", -1, -4));
        report.add(entry);
        assert!(!report.any_failed());
        assert_eq!(report.count(Status::PaperDiscrepancy), 1);
    }
}
