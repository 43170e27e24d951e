//! `check`, `solve` and `table`.

use std::time::Instant;

use super::config::{Constant, Point, ScenarioConfig};
use super::report::{CheckSummary, RunReport, SolutionSummary, TableSummary};
use super::{CliError, EXIT_FAIL, EXIT_OK};
use crate::contraction::{check_condition, estimate_min_constant, evaluate_condition, ContractionForm};
use crate::error::Error;
use crate::gmetric::{asymmetry_witnesses, check_axioms, check_basic_properties, check_dg_bounds, is_symmetric};
use crate::maps::{check_range_inclusion, check_weakly_commuting};
use crate::solver::{find_common_fixed_point, SolveOptions};
use crate::space::Tolerance;

/// Check names accepted by `run.checks`.
pub const CHECKS: [&str; 8] = [
    "axioms",
    "symmetry",
    "dg-bounds",
    "basic-properties",
    "range-inclusion",
    "weak-commutativity",
    "contraction",
    "min-constant",
];

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub n_max: Option<usize>,
    pub starts: Option<Vec<f64>>,
    pub strict: bool,
    pub constant: Option<String>,
    /// Value of `GFIX_SEED`, consulted after the flag and the file.
    pub env_seed: Option<String>,
}

impl Overrides {
    /// Applies the overrides and fixes the seed:
    /// `--seed`, then `run.seed`, then `GFIX_SEED`, then 0.
    pub fn apply(&self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
        if let Some(t) = self.tol {
            cfg.run.tol = t;
        }
        if let Some(n) = self.n_max {
            cfg.run.n_max = n;
        }
        if let Some(s) = &self.starts {
            cfg.run.starts = s.iter().map(|&v| Point::Value(v)).collect();
        }
        if self.strict {
            cfg.run.strict = true;
        }
        if let Some(c) = &self.constant {
            cfg.run.constant = Some(Constant::Text(c.clone()));
        }
        let env = match self.env_seed.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<u64>()
                    .map_err(|_| CliError::config(format!("GFIX_SEED is not an unsigned integer: `{s}`")))?,
            ),
        };
        cfg.run.seed = Some(self.seed.or(cfg.run.seed).or(env).unwrap_or(0));
        if !(cfg.run.tol > 0.0 && cfg.run.tol.is_finite()) {
            return Err(CliError::config(format!("tol must be positive, got {}", cfg.run.tol)));
        }
        for name in &cfg.run.checks {
            if !CHECKS.contains(&name.as_str()) {
                return Err(CliError::config(format!(
                    "unknown check `{name}`; known: {}",
                    CHECKS.join(", ")
                )));
            }
        }
        if let Some(c) = &cfg.run.constant {
            let v = c.value().map_err(CliError::from)?;
            if !cfg.run.exploratory {
                cfg.run
                    .form
                    .validate(v)
                    .map_err(|e| CliError::config(format!("{e}; set run.exploratory = true to test it anyway")))?;
            }
        }
        Ok(cfg)
    }
}

fn wanted(cfg: &ScenarioConfig, name: &str) -> bool {
    cfg.run.checks.is_empty() || cfg.run.checks.iter().any(|c| c == name)
}

fn finish(mut report: RunReport, start: Instant) -> RunReport {
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    report
}

/// Maps metric construction failures: an invalid table is a check failure,
/// anything else a configuration error.
fn metric_failure(report: &mut RunReport, e: Error) -> Result<(), CliError> {
    match e {
        Error::TableAxiom(v) => {
            report.checks.push(CheckSummary {
                first_violation: Some(v.clone()),
                worst: vec![v],
                passed: false,
                violation_count: 1,
                ..CheckSummary::info("axioms", "table rejected".into())
            });
            report.error = Some("table violates the G-metric axioms".into());
            report.exit_code = EXIT_FAIL;
            Ok(())
        }
        other => Err(CliError::from(other)),
    }
}

pub fn cmd_check(cfg: ScenarioConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let seed = cfg.run.seed.unwrap_or(0);
    let mut report = RunReport::new("check", cfg.clone(), seed);
    let tol = Tolerance::uniform(cfg.run.tol);
    let space = cfg.build_space(seed)?;
    let g = match cfg.build_metric(&space) {
        Ok(g) => g,
        Err(e) => {
            metric_failure(&mut report, e)?;
            return Ok(finish(report, start));
        }
    };
    let pairs = space.pairs();
    if wanted(&cfg, "axioms") {
        report.checks.push(CheckSummary::from_check(
            "axioms",
            &check_axioms(&g, &space.triples(), &tol)?,
        ));
    }
    if wanted(&cfg, "symmetry") {
        let s = is_symmetric(&g, &pairs, &tol)?;
        report.checks.push(CheckSummary {
            checked: pairs.len(),
            ..CheckSummary::info(
                "symmetry",
                if s.is_symmetric() {
                    "symmetric".into()
                } else {
                    "non-symmetric".into()
                },
            )
        });
        report.symmetry = Some(s);
    }
    if wanted(&cfg, "dg-bounds") {
        report.checks.push(CheckSummary::from_check(
            "dg-bounds",
            &check_dg_bounds(&g, &pairs, &tol)?,
        ));
    }
    if wanted(&cfg, "basic-properties") {
        let r = check_basic_properties(&g, &space.tuples::<5>(), &tol)?;
        report.checks.push(CheckSummary::from_check("basic-properties", &r));
    }
    if cfg.has_maps() {
        let sys = cfg.build_maps(&space)?;
        let points = space.points();
        if wanted(&cfg, "range-inclusion") {
            report.checks.push(CheckSummary::from_check(
                "range-t-in-a",
                &check_range_inclusion(&sys.t, &sys.a, &points, &tol)?,
            ));
            report.checks.push(CheckSummary::from_check(
                "range-s-in-b",
                &check_range_inclusion(&sys.s, &sys.b, &points, &tol)?,
            ));
        }
        if wanted(&cfg, "weak-commutativity") {
            report.checks.push(CheckSummary::from_check(
                "weakly-commuting-sa",
                &check_weakly_commuting(&g, &sys.s, &sys.a, &points, &tol)?,
            ));
            report.checks.push(CheckSummary::from_check(
                "weakly-commuting-tb",
                &check_weakly_commuting(&g, &sys.t, &sys.b, &points, &tol)?,
            ));
        }
        let form = cfg.run.form;
        if wanted(&cfg, "contraction") {
            if let Some(c) = &cfg.run.constant {
                let c = c.value()?;
                let mut r = if form.validate(c).is_ok() {
                    check_condition(&g, &sys, form, c, &pairs, &tol)?
                } else {
                    evaluate_condition(&g, &sys, form, c, &pairs, &tol)?
                };
                // Outside its range the constant cannot satisfy the hypothesis.
                r.passed &= form.validate(c).is_ok();
                report.checks.push(CheckSummary::from_contraction("contraction", &r));
            }
        }
        if wanted(&cfg, "min-constant") {
            report.checks.push(min_constant_summary(
                estimate_min_constant(&g, &sys, form, &pairs, &tol),
                form,
            )?);
        }
    }
    report.exit_code = if report.all_passed() { EXIT_OK } else { EXIT_FAIL };
    Ok(finish(report, start))
}

fn min_constant_summary(
    est: Result<crate::contraction::ConstantEstimate, Error>,
    form: ContractionForm,
) -> Result<CheckSummary, CliError> {
    Ok(match est {
        Ok(e) => CheckSummary {
            passed: e.value < form.bound(),
            checked: e.used + e.skipped,
            detail: Some(format!("{form}, admissible below {}", form.bound())),
            estimate: Some(e),
            ..CheckSummary::info("min-constant", String::new())
        },
        Err(Error::InconclusiveEstimate) => CheckSummary {
            inconclusive: Some("every sampled pair is 0/0".into()),
            ..CheckSummary::info("min-constant", form.to_string())
        },
        Err(e) => return Err(e.into()),
    })
}

pub fn cmd_solve(cfg: ScenarioConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let seed = cfg.run.seed.unwrap_or(0);
    let mut report = RunReport::new("solve", cfg.clone(), seed);
    let space = cfg.build_space(seed)?;
    let g = match cfg.build_metric(&space) {
        Ok(g) => g,
        Err(e) => {
            metric_failure(&mut report, e)?;
            return Ok(finish(report, start));
        }
    };
    let sys = cfg.build_maps(&space)?;
    let x0 = cfg.x0(&space)?;
    let opts = SolveOptions {
        form: cfg.run.form,
        constant: cfg.run.constant.as_ref().map(Constant::value).transpose()?,
        tol: cfg.run.tol,
        n_max: cfg.run.n_max,
        starts: cfg
            .run
            .starts
            .iter()
            .map(|p| p.resolve(&space))
            .collect::<Result<_, _>>()?,
        strict: cfg.run.strict,
        exploratory: cfg.run.exploratory,
        ..SolveOptions::default()
    };
    match find_common_fixed_point(&g, &sys, x0, &opts) {
        Ok(sol) => {
            let z_label = sol
                .certificate
                .as_ref()
                .filter(|_| space.is_finite())
                .map(|c| space.label(c.z));
            report.exit_code = if sol.accepted() { EXIT_OK } else { EXIT_FAIL };
            report.solution = Some(SolutionSummary::new(x0, &sol, z_label));
        }
        Err(Error::HypothesisFailed(failed)) => {
            report.error = Some(format!("strict mode: hypothesis checks failed: {}", failed.join(", ")));
            report.exit_code = EXIT_FAIL;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(finish(report, start))
}

pub fn cmd_table(cfg: ScenarioConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let seed = cfg.run.seed.unwrap_or(0);
    let mut report = RunReport::new("table", cfg.clone(), seed);
    let space = cfg.build_space(seed)?;
    if !space.is_finite() || !matches!(cfg.metric, super::config::MetricSpec::Table { .. }) {
        return Err(CliError::config(
            "`table` needs a finite space and a metric of kind \"table\"",
        ));
    }
    let n = space.finite_points().map_or(0, <[_]>::len);
    let rows = n * n * n;
    let g = match cfg.build_metric(&space) {
        Ok(g) => g,
        Err(Error::TableAxiom(v)) => {
            report.table = Some(TableSummary {
                points: n,
                rows,
                valid: false,
                first_violation: Some(v),
                asymmetry_witnesses: Vec::new(),
            });
            report.exit_code = EXIT_FAIL;
            return Ok(finish(report, start));
        }
        Err(e) => return Err(e.into()),
    };
    let tol = Tolerance::uniform(cfg.run.tol);
    let pairs = space.pairs();
    report.checks.push(CheckSummary::from_check(
        "axioms",
        &check_axioms(&g, &space.triples(), &tol)?,
    ));
    report.symmetry = Some(is_symmetric(&g, &pairs, &tol)?);
    report.table = Some(TableSummary {
        points: n,
        rows,
        valid: report.all_passed(),
        first_violation: None,
        asymmetry_witnesses: asymmetry_witnesses(&g, &pairs, &tol)?
            .into_iter()
            .map(|v| [space.label(v.witness[0]), space.label(v.witness[1])])
            .collect(),
    });
    report.exit_code = if report.all_passed() { EXIT_OK } else { EXIT_FAIL };
    Ok(finish(report, start))
}
