//! Report records, their JSON/Markdown renderings and the `explain` summary.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sfl_core::pohozaev::{PsdCertificate, PsdVerdict};

use crate::config::{ExperimentConfig, Suite};

/// One thresholded quantity: it passes iff `value ≤ limit`. Boolean checks
/// use `value = 0` (holds) or `1` (fails) against `limit = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(id: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            id: id.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    pub fn holds(id: impl Into<String>, ok: bool) -> Self {
        Self::at_most(id, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    /// `value / limit`, the fraction of the budget used (boolean checks: 0 or ∞).
    pub fn usage(&self) -> f64 {
        if self.limit > 0.0 {
            self.value / self.limit
        } else if self.value <= self.limit {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Failed check ids and errors that prevented a check from running.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<PsdCertificate>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl SuiteResult {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            passed: true,
            checks: Vec::new(),
            failures: Vec::new(),
            notes: Vec::new(),
            certificates: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.failures.push(message.into());
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.notes.push(message.into());
    }

    /// Settles `passed` and lists failed checks ahead of recorded errors.
    pub fn finish(mut self) -> Self {
        let mut failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.clone())
            .collect();
        failed.append(&mut self.failures);
        self.failures = failed;
        self.passed = self.failures.is_empty();
        self
    }

    /// The check closest to (or furthest past) its limit.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| a.usage().total_cmp(&b.usage()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub name: String,
    pub description: String,
    pub n: usize,
    pub fingerprint: String,
    pub star_margin: f64,
    pub smallest_eigenvalue: f64,
    pub largest_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteTiming {
    pub suite: Suite,
    pub seconds: f64,
}

/// Wall-clock times; the only part of a report that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub setup_seconds: f64,
    pub suites: Vec<SuiteTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: ToolInfo,
    pub seed: Option<u64>,
    pub config: ExperimentConfig,
    pub domains: Vec<DomainSummary>,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

pub const NO_SUITES_WARNING: &str = "warning: no suites selected";

/// `{:e}` keeps the shortest round-trip digits, so Markdown numbers match the JSON exactly.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Pass/fail table with the worst check of each suite.
pub fn suite_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "| suite | verdict | checks | worst check | value | limit |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|");
    for s in &report.suites {
        let (id, value, limit) = match s.worst() {
            Some(c) => (c.id.as_str(), num(c.value), num(c.limit)),
            None => ("-", "-".into(), "-".into()),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            s.suite,
            verdict(s.passed),
            s.checks.len(),
            id,
            value,
            limit
        );
    }
    out
}

fn witness_lines(out: &mut String, cert: &PsdCertificate) {
    if let PsdVerdict::Indefinite {
        witness,
        quadratic_value,
    } = &cert.verdict
    {
        let _ = writeln!(
            out,
            "  {}: min eigenvalue {} below threshold {}",
            cert.label,
            num(cert.min_eigenvalue),
            num(cert.threshold)
        );
        let _ = writeln!(
            out,
            "    witness quadratic value vᵀMv = {}",
            num(*quadratic_value)
        );
        let entries: Vec<String> = witness.iter().map(|w| num(*w)).collect();
        let _ = writeln!(out, "    witness v = [{}]", entries.join(", "));
    }
}

/// Failed items of every failing suite, with PSD witnesses.
pub fn failure_listing(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for s in report.suites.iter().filter(|s| !s.passed) {
        let _ = writeln!(out, "{} failed:", s.suite);
        for f in &s.failures {
            match s.checks.iter().find(|c| &c.id == f) {
                Some(c) => {
                    let _ = writeln!(out, "  {}: {} > {}", c.id, num(c.value), num(c.limit));
                }
                None => {
                    let _ = writeln!(out, "  {f}");
                }
            }
        }
        for cert in &s.certificates {
            let failing = s.failures.iter().any(|f| f.contains(&cert.label));
            if failing {
                witness_lines(&mut out, cert);
            }
        }
    }
    out
}

/// Human summary printed by `explain`.
pub fn explain(report: &ExperimentReport) -> String {
    let mut out = String::new();
    if report.suites.is_empty() {
        let _ = writeln!(out, "{NO_SUITES_WARNING}");
    }
    for w in &report.warnings {
        if w != NO_SUITES_WARNING {
            let _ = writeln!(out, "{w}");
        }
    }
    let _ = writeln!(
        out,
        "overall: {} (seed {})",
        verdict(report.passed),
        report.seed.map_or("none".into(), |s| s.to_string())
    );
    out.push_str(&suite_table(report));
    let failures = failure_listing(report);
    if !failures.is_empty() {
        out.push('\n');
        out.push_str(&failures);
    }
    out
}

/// Markdown rendering of the report.
pub fn markdown(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Experiment report\n");
    let _ = writeln!(
        out,
        "Overall verdict: **{}**. Seed: {}. Tool: {} {}.\n",
        verdict(report.passed),
        report.seed.map_or("none".into(), |s| s.to_string()),
        report.tool.name,
        report.tool.version
    );
    for w in &report.warnings {
        let _ = writeln!(out, "> {w}\n");
    }
    if !report.domains.is_empty() {
        let _ = writeln!(out, "## Domains\n");
        let _ = writeln!(
            out,
            "| name | description | n | fingerprint | star margin | λ_1 | λ_n |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|");
        for d in &report.domains {
            let _ = writeln!(
                out,
                "| {} | {} | {} | `{}` | {} | {} | {} |",
                d.name,
                d.description,
                d.n,
                d.fingerprint,
                num(d.star_margin),
                num(d.smallest_eigenvalue),
                num(d.largest_eigenvalue)
            );
        }
        out.push('\n');
    }
    let _ = writeln!(out, "## Suites\n");
    out.push_str(&suite_table(report));
    for s in &report.suites {
        let _ = writeln!(out, "\n### {} ({})\n", s.suite, verdict(s.passed));
        for n in &s.notes {
            let _ = writeln!(out, "- {n}");
        }
        if !s.notes.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "| check | value | limit | verdict |");
        let _ = writeln!(out, "|---|---|---|---|");
        for c in &s.checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                c.id,
                num(c.value),
                num(c.limit),
                verdict(c.passed)
            );
        }
    }
    let failures = failure_listing(report);
    if !failures.is_empty() {
        let _ = writeln!(out, "\n## Failures\n\n```text\n{failures}```");
    }
    out
}

/// The report as JSON without the `timing` member.
pub fn numeric_payload(report: &serde_json::Value) -> serde_json::Value {
    let mut v = report.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timing");
    }
    v
}
