//! Self-contained experiment records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::estimate::EstimateCI;
use crate::sampling::SeedSpec;

/// Slack, in standard errors, used by every Monte Carlo comparison.
pub const CI_SLACK: f64 = 4.0;

/// A named yes/no outcome.
///
/// Hard verdicts encode constant-free facts and decide the exit status;
/// soft ones check the stability of fitted constants and are reported only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub hard: bool,
    /// Names of the estimates (or fitted constants) the verdict is about.
    pub refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A grid of results; one row per grid point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// JSON number for a float; non-finite values become null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// JSON shape: `verdicts` is a map of named booleans; the tier, references
/// and notes of each verdict sit beside it in `verdict_details`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ReportRepr", from = "ReportRepr")]
pub struct ExperimentReport {
    pub name: String,
    /// Canonical command line that reproduces the report.
    pub command: Option<String>,
    pub body: String,
    pub parameters: Value,
    pub seed: SeedSpec,
    pub ci_slack_sigmas: f64,
    pub estimates: BTreeMap<String, EstimateCI>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub fitted_constants: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VerdictDetail {
    hard: bool,
    refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command: Option<String>,
    body: String,
    parameters: Value,
    seed: SeedSpec,
    ci_slack_sigmas: f64,
    estimates: BTreeMap<String, EstimateCI>,
    verdicts: BTreeMap<String, bool>,
    verdict_details: BTreeMap<String, VerdictDetail>,
    fitted_constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    tables: BTreeMap<String, Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

impl From<ExperimentReport> for ReportRepr {
    fn from(r: ExperimentReport) -> Self {
        let verdicts = r.verdicts.iter().map(|(k, v)| (k.clone(), v.passed)).collect();
        let verdict_details = r
            .verdicts
            .into_iter()
            .map(|(k, v)| (k, VerdictDetail { hard: v.hard, refs: v.refs, note: v.note }))
            .collect();
        ReportRepr {
            name: r.name,
            command: r.command,
            body: r.body,
            parameters: r.parameters,
            seed: r.seed,
            ci_slack_sigmas: r.ci_slack_sigmas,
            estimates: r.estimates,
            verdicts,
            verdict_details,
            fitted_constants: r.fitted_constants,
            tables: r.tables,
            notes: r.notes,
        }
    }
}

impl From<ReportRepr> for ExperimentReport {
    fn from(r: ReportRepr) -> Self {
        let mut details = r.verdict_details;
        let verdicts = r
            .verdicts
            .into_iter()
            .map(|(k, passed)| {
                // a verdict without details is treated as hard
                let d = details.remove(&k).unwrap_or(VerdictDetail { hard: true, refs: Vec::new(), note: None });
                (k, Verdict { passed, hard: d.hard, refs: d.refs, note: d.note })
            })
            .collect();
        ExperimentReport {
            name: r.name,
            command: r.command,
            body: r.body,
            parameters: r.parameters,
            seed: r.seed,
            ci_slack_sigmas: r.ci_slack_sigmas,
            estimates: r.estimates,
            verdicts,
            fitted_constants: r.fitted_constants,
            tables: r.tables,
            notes: r.notes,
        }
    }
}

impl ExperimentReport {
    pub fn new<P: Serialize>(name: &str, body: &str, parameters: &P, seed: &SeedSpec) -> Self {
        ExperimentReport {
            name: name.to_string(),
            command: None,
            body: body.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seed: seed.clone(),
            ci_slack_sigmas: CI_SLACK,
            estimates: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            fitted_constants: BTreeMap::new(),
            tables: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn estimate(&mut self, name: impl Into<String>, est: EstimateCI) {
        self.estimates.insert(name.into(), est);
    }

    pub fn fitted(&mut self, name: impl Into<String>, value: f64) {
        self.fitted_constants.insert(name.into(), value);
    }

    fn verdict(&mut self, name: &str, passed: bool, hard: bool, refs: &[String], note: Option<String>) {
        if !passed {
            log::warn!("{}: verdict {name} failed", self.name);
        }
        self.verdicts
            .insert(name.to_string(), Verdict { passed, hard, refs: refs.to_vec(), note });
    }

    pub fn hard(&mut self, name: &str, passed: bool, refs: &[String]) {
        self.verdict(name, passed, true, refs, None);
    }

    pub fn soft(&mut self, name: &str, passed: bool, refs: &[String]) {
        self.verdict(name, passed, false, refs, None);
    }

    pub fn hard_with_note(&mut self, name: &str, passed: bool, refs: &[String], note: &str) {
        self.verdict(name, passed, true, refs, Some(note.to_string()));
    }

    pub fn soft_with_note(&mut self, name: &str, passed: bool, refs: &[String], note: &str) {
        self.verdict(name, passed, false, refs, Some(note.to_string()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn all_hard_passed(&self) -> bool {
        self.verdicts.values().all(|v| v.passed || !v.hard)
    }

    pub fn failed_hard(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| v.hard && !v.passed)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn failed_soft(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| !v.hard && !v.passed)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn verdict_passed(&self, name: &str) -> Option<bool> {
        self.verdicts.get(name).map(|v| v.passed)
    }

    /// Every verdict reference names an estimate or fitted constant.
    pub fn references_resolve(&self) -> bool {
        self.verdicts.values().flat_map(|v| &v.refs).all(|r| {
            self.estimates.contains_key(r) || self.fitted_constants.contains_key(r)
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_failures_are_listed() {
        let s = SeedSpec::new(0);
        let mut r = ExperimentReport::new("t", "lp:2:3", &serde_json::json!({"n": 3}), &s);
        r.estimate("a", EstimateCI::analytic(1.0, &s));
        r.hard("ok", true, &["a".into()]);
        r.soft("fit", false, &["a".into()]);
        assert!(r.all_hard_passed());
        r.hard("bad", false, &["a".into()]);
        assert_eq!(r.failed_hard(), vec!["bad"]);
        assert_eq!(r.failed_soft(), vec!["fit"]);
        assert!(r.references_resolve());
        r.hard("dangling", true, &["missing".into()]);
        assert!(!r.references_resolve());
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["verdicts"]["ok"], Value::Bool(true));
        assert_eq!(json["verdict_details"]["bad"]["hard"], Value::Bool(true));
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
