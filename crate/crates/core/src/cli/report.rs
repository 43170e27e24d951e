//! The structured run report and its human rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::contraction::{ConstantEstimate, ContractionReport};
use crate::gmetric::Symmetry;
use crate::report::{CheckReport, Violation};
use crate::solver::{FixedPointCertificate, IterationTrace, Solution, StartOutcome, TraceStatus, Uniqueness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// The scenario as run, after command-line overrides.
    pub scenario: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
    /// The only field that varies between identical runs.
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: &str, scenario: ScenarioConfig, seed: u64) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            scenario,
            symmetry: None,
            checks: Vec::new(),
            table: None,
            solution: None,
            error: None,
            exit_code: 0,
            wall_time_ms: 0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Multi-line plain-text summary.
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} (seed {})",
            self.tool, self.command, self.scenario.name, self.seed
        );
        if let Some(s) = &self.symmetry {
            let _ = writeln!(out, "  symmetry: {}", symmetry_text(s));
        }
        for c in &self.checks {
            let _ = writeln!(out, "  {}", c.line());
        }
        if let Some(t) = &self.table {
            let _ = writeln!(
                out,
                "  table: {} rows over {} points, {}",
                t.rows,
                t.points,
                if t.valid { "valid G-metric" } else { "invalid" }
            );
            if let Some(v) = &t.first_violation {
                let _ = writeln!(out, "    first violation: {v}");
            }
            for w in &t.asymmetry_witnesses {
                let _ = writeln!(out, "    asymmetric pair ({}, {})", w[0], w[1]);
            }
        }
        if let Some(s) = &self.solution {
            out.push_str(&s.human());
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "  error: {e}");
        }
        let _ = writeln!(out, "exit {}", self.exit_code);
        out
    }
}

/// Plain notation for moderate magnitudes, exponent notation otherwise.
fn num(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn uniqueness_text(u: &Uniqueness) -> String {
    match u {
        Uniqueness::ProvedByEnumeration => "proved by enumeration".into(),
        Uniqueness::UniqueOnSample { starts } => format!("unique on {} starts", starts.len()),
        Uniqueness::NotChecked => "not checked".into(),
        Uniqueness::Contradicted { others, detail } => format!("contradicted ({detail}; others {others:?})"),
    }
}

fn symmetry_text(s: &Symmetry) -> String {
    match s {
        Symmetry::Yes => "symmetric".into(),
        Symmetry::YesOnSample => "symmetric on the sample".into(),
        Symmetry::No {
            x,
            y,
            forward,
            backward,
        } => {
            format!("non-symmetric, G({x},{y},{y}) = {forward} but G({y},{x},{x}) = {backward}")
        }
        Symmetry::Unknown => "unknown".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub violation_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
    /// Largest-excess violation of each rule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub worst: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ConstantEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckSummary {
    pub fn from_check(name: &str, r: &CheckReport) -> Self {
        let mut rules: Vec<&str> = r.violations.iter().map(|v| v.rule.as_str()).collect();
        rules.sort_unstable();
        rules.dedup();
        CheckSummary {
            name: name.to_string(),
            passed: r.passed,
            checked: r.checked,
            violation_count: r.violations.len(),
            first_violation: r.first_violation().cloned(),
            worst: rules
                .into_iter()
                .filter_map(|rule| crate::report::worst(r.violations_of(rule).collect::<Vec<_>>()).cloned())
                .collect(),
            inconclusive: r.inconclusive.clone(),
            constant: None,
            estimate: None,
            detail: None,
        }
    }

    pub fn from_contraction(name: &str, r: &ContractionReport) -> Self {
        CheckSummary {
            name: name.to_string(),
            passed: r.passed,
            checked: r.checked,
            violation_count: r.violations.len(),
            first_violation: r.first_violation().cloned(),
            worst: r.worst_per_rule().into_iter().cloned().collect(),
            inconclusive: None,
            constant: Some(r.constant),
            estimate: r.min_constant_estimate.clone(),
            detail: Some(r.form.to_string()),
        }
    }

    pub fn info(name: &str, detail: String) -> Self {
        CheckSummary {
            name: name.to_string(),
            passed: true,
            checked: 0,
            violation_count: 0,
            first_violation: None,
            worst: Vec::new(),
            inconclusive: None,
            constant: None,
            estimate: None,
            detail: Some(detail),
        }
    }

    fn line(&self) -> String {
        let verdict = match (self.passed, &self.inconclusive) {
            (_, Some(_)) if self.violation_count == 0 => "INCONCLUSIVE",
            (true, _) => "PASS",
            (false, _) => "FAIL",
        };
        let mut s = format!("{verdict:<12} {:<22} checked {}", self.name, self.checked);
        if let Some(c) = self.constant {
            let _ = write!(s, ", constant {c}");
        }
        if self.violation_count > 0 {
            let _ = write!(s, ", {} violations", self.violation_count);
        }
        if let Some(e) = &self.estimate {
            let _ = write!(s, ", estimate {} at ({}, {})", e.value, e.witness[0], e.witness[1]);
        }
        if let Some(d) = &self.detail {
            let _ = write!(s, " [{d}]");
        }
        if let Some(r) = &self.inconclusive {
            let _ = write!(s, " ({r})");
        }
        for w in &self.worst {
            let _ = write!(s, "\n{:15}worst {w}", "");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub points: usize,
    pub rows: usize,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
    /// Label pairs `(x, y)` with `G(x,y,y) != G(y,x,x)`.
    pub asymmetry_witnesses: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub x0: f64,
    pub hypotheses: Vec<CheckSummary>,
    pub trace: IterationTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<CheckSummary>,
    pub convergence: CheckSummary,
    pub starts: Vec<StartOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FixedPointCertificate>,
    /// Label of `z` on finite spaces.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_label: Option<String>,
}

impl SolutionSummary {
    pub fn new(x0: f64, sol: &Solution, z_label: Option<String>) -> Self {
        let h = &sol.hypotheses;
        SolutionSummary {
            x0,
            hypotheses: vec![
                CheckSummary::from_check("range-t-in-a", &h.range_t_in_a),
                CheckSummary::from_check("range-s-in-b", &h.range_s_in_b),
                CheckSummary::from_check("weakly-commuting-sa", &h.weakly_commuting_sa),
                CheckSummary::from_check("weakly-commuting-tb", &h.weakly_commuting_tb),
                CheckSummary::from_contraction("contraction", &h.contraction),
            ],
            trace: sol.trace.clone(),
            rate: sol.rate.as_ref().map(|r| CheckSummary::from_check("rate", r)),
            convergence: CheckSummary::from_check("convergence", &sol.convergence),
            starts: sol.starts.clone(),
            certificate: sol.certificate.clone(),
            z_label,
        }
    }

    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "  hypotheses:");
        for c in &self.hypotheses {
            let _ = writeln!(out, "    {}", c.line());
        }
        let t = &self.trace;
        let status = match &t.status {
            TraceStatus::Converged => format!("converged after {} iterations", t.iterations),
            TraceStatus::MaxIter => format!("no convergence within {} steps", t.y_seq.len()),
            TraceStatus::PreimageFailure { role, target } => {
                format!("no preimage of {target} under {role} after {} steps", t.y_seq.len())
            }
        };
        let _ = writeln!(out, "  trace from x0 = {}: {status}", self.x0);
        if let Some(r) = &self.rate {
            let _ = writeln!(out, "    {}", r.line());
        }
        let _ = writeln!(out, "    {}", self.convergence.line());
        for s in &self.starts {
            let _ = writeln!(
                out,
                "  start {}: {}",
                s.x0,
                match s.limit {
                    Some(l) => format!("limit {} after {} iterations", num(l), s.iterations),
                    None => "no limit".into(),
                }
            );
        }
        match &self.certificate {
            Some(c) => {
                let z = match &self.z_label {
                    Some(l) => format!("{l} ({})", c.z),
                    None => num(c.z),
                };
                let _ = writeln!(
                    out,
                    "  certificate: z = {z}, max residual {}, uniqueness {}, {}",
                    num(c.residuals.max()),
                    uniqueness_text(&c.uniqueness),
                    if c.accepted { "accepted" } else { "rejected" }
                );
                if !c.downgraded_by.is_empty() {
                    let _ = writeln!(out, "    downgraded by: {}", c.downgraded_by.join(", "));
                }
            }
            None => {
                let _ = writeln!(out, "  certificate: none");
            }
        }
        out
    }
}
