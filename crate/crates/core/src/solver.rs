//! The coupled iteration for four maps and the certificate built from it.
//!
//! Starting from `x0` the solver alternately solves
//!
//! ```text
//! A x[2n+1] = T x[2n]   =: y[2n]
//! B x[2n+2] = S x[2n+1] =: y[2n+1]
//! ```
//!
//! and watches `G(y[n], y[n+1], y[n+1])` shrink. The limit is the final
//! recorded `y`, never an extrapolation.

use serde::{Deserialize, Serialize};

use crate::contraction::{
    check_condition, estimate_min_constant, evaluate_condition, ContractionForm, ContractionReport,
};
use crate::error::{Error, Result};
use crate::gmetric::{derived_metric, GMetric};
use crate::maps::{check_range_inclusion, check_weakly_commuting, preimage_solve, MapSystem};
use crate::report::{CheckReport, Violation};
use crate::space::Tolerance;

/// Consecutive sub-tolerance steps required to stop.
pub const CONFIRMING_STEPS: usize = 3;
/// Above this many `y` values the tail bound is checked on a subsample.
const TAIL_ALL_PAIRS: usize = 200;
const TAIL_SUBSAMPLE: usize = 150;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TraceStatus {
    Converged,
    MaxIter,
    PreimageFailure { role: String, target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub x_seq: Vec<f64>,
    pub y_seq: Vec<f64>,
    /// `step_g[n] = G(y[n], y[n+1], y[n+1])`.
    pub step_g: Vec<f64>,
    /// `c^n * step_g[0]`, filled once a rate constant is known.
    pub predicted_bound: Vec<f64>,
    pub limit: Option<f64>,
    pub status: TraceStatus,
    /// Steps taken before the confirming window opened.
    pub iterations: usize,
}

impl IterationTrace {
    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }

    pub fn with_predicted_bound(mut self, c: f64) -> Self {
        let first = self.step_g.first().copied().unwrap_or(0.0);
        self.predicted_bound = (0..self.step_g.len()).map(|n| c.powi(n as i32) * first).collect();
        self
    }
}

/// Runs the coupled iteration from `x0` for at most `n_max` values of `y`.
///
/// Stops once [`CONFIRMING_STEPS`] consecutive steps are at most `tol`. A
/// target with no preimage ends the run with
/// [`TraceStatus::PreimageFailure`].
pub fn build_sequence(g: &GMetric, sys: &MapSystem, x0: f64, n_max: usize, tol: f64) -> Result<IterationTrace> {
    let ptol = Tolerance::uniform(tol);
    let mut trace = IterationTrace {
        x_seq: vec![x0],
        y_seq: Vec::new(),
        step_g: Vec::new(),
        predicted_bound: Vec::new(),
        limit: None,
        status: TraceStatus::MaxIter,
        iterations: 0,
    };
    let mut quiet = 0;
    let mut x = x0;
    for n in 0..n_max {
        let (role, target, solve) = if n % 2 == 0 {
            ("A", sys.t.apply(x), &sys.a)
        } else {
            ("B", sys.s.apply(x), &sys.b)
        };
        x = match preimage_solve(solve, target, &ptol) {
            Ok(next) => next,
            Err(Error::NoPreimage { .. }) | Err(Error::NotMonotone(_)) => {
                trace.status = TraceStatus::PreimageFailure {
                    role: role.to_string(),
                    target,
                };
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        trace.x_seq.push(x);
        trace.y_seq.push(target);
        if let [.., prev, last] = trace.y_seq[..] {
            let step = g.eval(prev, last, last)?;
            trace.step_g.push(step);
            quiet = if step <= tol { quiet + 1 } else { 0 };
            if quiet == CONFIRMING_STEPS {
                trace.status = TraceStatus::Converged;
                trace.limit = Some(last);
                trace.iterations = trace.step_g.len() - CONFIRMING_STEPS;
                return Ok(trace);
            }
        }
    }
    trace.iterations = trace.step_g.len();
    Ok(trace)
}

/// The constant of a contraction hypothesis, as used for the rate bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "constant", rename_all = "kebab-case")]
pub enum RateConstant {
    /// `h`, used directly.
    Max(f64),
    /// `k`, converted to `k / (1 - k)`.
    Sum(f64),
}

impl RateConstant {
    pub fn new(form: ContractionForm, constant: f64) -> Self {
        match form {
            ContractionForm::Max => RateConstant::Max(constant),
            ContractionForm::Sum => RateConstant::Sum(constant),
        }
    }

    /// The geometric rate `c`, validated to lie in `[0, 1)`.
    pub fn rate(self) -> Result<f64> {
        match self {
            RateConstant::Max(h) => {
                ContractionForm::Max.validate(h)?;
                Ok(h)
            }
            RateConstant::Sum(k) => {
                ContractionForm::Sum.validate(k)?;
                Ok(k / (1.0 - k))
            }
        }
    }
}

/// Checks `step_g[n] <= c^n step_g[0] + tol` for every `n`, and
/// `G(y[n], y[m], y[m]) <= c^n / (1 - c) * step_g[0] + tol` for `n < m`
/// (every pair on short traces, a fixed index subsample on long ones).
pub fn check_rate(g: &GMetric, trace: &IterationTrace, rate: RateConstant, tol: f64) -> Result<CheckReport> {
    let c = rate.rate()?;
    let mut report = CheckReport::new();
    let Some(&first) = trace.step_g.first() else {
        return Ok(CheckReport::inconclusive("fewer than two y values"));
    };
    for (n, &step) in trace.step_g.iter().enumerate() {
        report.expect_le("rate-step", &[n as f64], step, c.powi(n as i32) * first, tol);
    }
    let ys = &trace.y_seq;
    let idx = tail_indices(ys.len());
    for (i, &n) in idx.iter().enumerate() {
        let bound = c.powi(n as i32) / (1.0 - c) * first;
        for &m in &idx[i + 1..] {
            let lhs = g.eval(ys[n], ys[m], ys[m])?;
            report.expect_le("rate-tail", &[n as f64, m as f64], lhs, bound, tol);
        }
    }
    Ok(report.finish())
}

fn tail_indices(len: usize) -> Vec<usize> {
    if len <= TAIL_ALL_PAIRS {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..TAIL_SUBSAMPLE / 3).collect();
    let stride = (len - 1) as f64 / (TAIL_SUBSAMPLE - TAIL_SUBSAMPLE / 3) as f64;
    idx.extend((0..=TAIL_SUBSAMPLE - TAIL_SUBSAMPLE / 3).map(|k| (k as f64 * stride).round() as usize));
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Checks the three equivalent convergence criteria against the limit `z`.
///
/// Along the trace, every `G(y[n], y[m], y[m])` must respect the telescoped
/// bound `sum_{k=n}^{m-1} step_g[k]`. At the final index `N - 1`,
/// `G(y, z, z) <= tol` and `G(y, y, z) <= 2 tol` (because
/// `G(x, x, y) <= 2 G(x, y, y)`), and `d_G(z, y) <= 3 G(z, y, y)`.
pub fn check_convergence_equivalences(g: &GMetric, trace: &IterationTrace, tol: f64) -> Result<CheckReport> {
    let Some(z) = trace.limit.filter(|_| trace.converged()) else {
        let mut r = CheckReport::inconclusive("not converged");
        r.passed = false;
        return Ok(r);
    };
    let ys = &trace.y_seq;
    let mut report = CheckReport::new();
    let idx = tail_indices(ys.len());
    let mut prefix = vec![0.0];
    for s in &trace.step_g {
        prefix.push(prefix.last().unwrap() + s);
    }
    for (i, &n) in idx.iter().enumerate() {
        for &m in &idx[i + 1..] {
            let lhs = g.eval(ys[n], ys[m], ys[m])?;
            report.expect_le("tail-sum", &[n as f64, m as f64], lhs, prefix[m] - prefix[n], tol);
        }
    }
    let n = ys.len().saturating_sub(2);
    let y = ys[n];
    let w = &[n as f64];
    report.expect_le("limit-yzz", w, g.eval(y, z, z)?, 0.0, tol);
    report.expect_le("limit-yyz", w, g.eval(y, y, z)?, 0.0, 2.0 * tol);
    report.expect_le("limit-ymz", w, g.eval(ys[n.saturating_sub(1)], y, z)?, 0.0, 2.0 * tol);
    report.expect_le("limit-dG", w, derived_metric(g, z, y)?, 3.0 * g.eval(z, y, y)?, tol);
    Ok(report.finish())
}

/// Every `z` with `Az = Bz = Sz = Tz = z`, by enumeration of a finite space.
pub fn brute_force_fixed_points(sys: &MapSystem) -> Result<Vec<f64>> {
    let points = sys
        .space()
        .finite_points()
        .ok_or(Error::Unsupported("brute-force enumeration on an interval"))?;
    Ok(points
        .iter()
        .map(|p| p.value)
        .filter(|&z| sys.roles().iter().all(|(_, m)| m.apply(z) == z))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub form: ContractionForm,
    /// Constant for the contraction check; estimated from the sample when absent.
    pub constant: Option<f64>,
    pub tol: f64,
    pub n_max: usize,
    /// Extra starting points for the uniqueness evidence on intervals.
    pub starts: Vec<f64>,
    /// Abort with [`Error::HypothesisFailed`] instead of downgrading.
    pub strict: bool,
    /// Accept a supplied constant outside its range; the contraction check
    /// then always fails, and no rate bound is checked.
    pub exploratory: bool,
    pub agreement_tol: f64,
    pub continuity_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            form: ContractionForm::Max,
            constant: None,
            tol: 1e-9,
            n_max: 10_000,
            starts: Vec::new(),
            strict: false,
            exploratory: false,
            agreement_tol: 1e-8,
            continuity_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub range_t_in_a: CheckReport,
    pub range_s_in_b: CheckReport,
    pub weakly_commuting_sa: CheckReport,
    pub weakly_commuting_tb: CheckReport,
    pub contraction: ContractionReport,
}

impl HypothesisReport {
    pub fn named(&self) -> [(&'static str, bool); 5] {
        [
            ("range T in A", self.range_t_in_a.passed),
            ("range S in B", self.range_s_in_b.passed),
            ("weakly commuting (S, A)", self.weakly_commuting_sa.passed),
            ("weakly commuting (T, B)", self.weakly_commuting_tb.passed),
            ("contraction", self.contraction.passed),
        ]
    }

    pub fn failed(&self) -> Vec<String> {
        self.named()
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n.to_string())
            .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.failed().is_empty()
    }
}

/// Runs the hypothesis checks on the space's sample.
///
/// Without a supplied constant the contraction is checked at the estimated
/// minimal constant when that lies in range, and at the largest in-range
/// value below the bound otherwise, so that the report names the failure.
pub fn check_hypotheses(
    g: &GMetric,
    sys: &MapSystem,
    opts: &SolveOptions,
    tol: &Tolerance,
) -> Result<HypothesisReport> {
    let space = sys.space();
    let points = space.points();
    let pairs = space.pairs();
    let contraction = match opts.constant {
        Some(c) if opts.exploratory && opts.form.validate(c).is_err() => {
            let mut r = evaluate_condition(g, sys, opts.form, c, &pairs, tol)?;
            r.passed = false;
            r
        }
        Some(c) => check_condition(g, sys, opts.form, c, &pairs, tol)?,
        None => match estimate_min_constant(g, sys, opts.form, &pairs, tol) {
            Ok(e) if e.value < opts.form.bound() => check_condition(g, sys, opts.form, e.value, &pairs, tol)?,
            Ok(e) => {
                // No admissible constant exists on the sample. A check just
                // below the bound can pass within tolerance, so record the
                // estimate's witness as the violation.
                let mut r = check_condition(g, sys, opts.form, prev_float(opts.form.bound()), &pairs, tol)?;
                if r.violation_at(e.witness[0], e.witness[1]).is_none() {
                    r.violations
                        .push(Violation::new(&e.rule, &e.witness, e.lhs, r.constant * e.term));
                }
                r.passed = false;
                r
            }
            Err(Error::InconclusiveEstimate) => check_condition(g, sys, opts.form, 0.0, &pairs, tol)?,
            Err(e) => return Err(e),
        },
    };
    Ok(HypothesisReport {
        range_t_in_a: check_range_inclusion(&sys.t, &sys.a, &points, tol)?,
        range_s_in_b: check_range_inclusion(&sys.s, &sys.b, &points, tol)?,
        weakly_commuting_sa: check_weakly_commuting(g, &sys.s, &sys.a, &points, tol)?,
        weakly_commuting_tb: check_weakly_commuting(g, &sys.t, &sys.b, &points, tol)?,
        contraction,
    })
}

fn prev_float(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub t: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.a.max(self.b).max(self.s).max(self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Uniqueness {
    ProvedByEnumeration,
    UniqueOnSample {
        starts: Vec<f64>,
    },
    NotChecked,
    /// Other common fixed points, or multi-start runs that disagree or fail.
    Contradicted {
        others: Vec<f64>,
        detail: String,
    },
}

/// How far each map moves along the generated sequence, compared with its
/// value at the limit: `max_n G(M y[n], M z, M z)` over the confirming window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityEvidence {
    pub role: String,
    pub max_deviation: f64,
    pub within_tol: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCertificate {
    pub z: f64,
    pub residuals: Residuals,
    /// The rate `c` of the bound, after the `k / (1 - k)` conversion for the sum form.
    pub rate_constant_used: Option<f64>,
    pub uniqueness: Uniqueness,
    pub continuity: Vec<ContinuityEvidence>,
    /// Hypothesis checks that failed; non-empty means the certificate is downgraded.
    pub downgraded_by: Vec<String>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub x0: f64,
    pub status: TraceStatus,
    pub limit: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub hypotheses: HypothesisReport,
    pub trace: IterationTrace,
    pub rate: Option<CheckReport>,
    pub convergence: CheckReport,
    pub starts: Vec<StartOutcome>,
    pub certificate: Option<FixedPointCertificate>,
}

impl Solution {
    pub fn accepted(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.accepted)
    }
}

/// Checks the hypotheses, iterates from `x0`, and certifies the limit.
///
/// Failed hypotheses are listed in the certificate; with `opts.strict` they
/// abort instead. A certificate exists only for a converged trace and is
/// accepted when all four residuals are within `opts.tol`.
pub fn find_common_fixed_point(g: &GMetric, sys: &MapSystem, x0: f64, opts: &SolveOptions) -> Result<Solution> {
    let tol = Tolerance::uniform(opts.tol);
    let hypotheses = check_hypotheses(g, sys, opts, &tol)?;
    let failed = hypotheses.failed();
    if opts.strict && !failed.is_empty() {
        return Err(Error::HypothesisFailed(failed));
    }
    let rate_constant = RateConstant::new(opts.form, hypotheses.contraction.constant);
    let c = rate_constant.rate().ok();
    let mut trace = build_sequence(g, sys, x0, opts.n_max, opts.tol)?;
    if let Some(c) = c {
        trace = trace.with_predicted_bound(c);
    }
    let rate = match c {
        Some(_) if trace.step_g.is_empty() => None,
        Some(_) => Some(check_rate(g, &trace, rate_constant, opts.tol)?),
        None => None,
    };
    let convergence = check_convergence_equivalences(g, &trace, opts.tol)?;

    let starts = opts
        .starts
        .iter()
        .map(|&s| {
            let t = build_sequence(g, sys, s, opts.n_max, opts.tol)?;
            Ok(StartOutcome {
                x0: s,
                limit: t.limit,
                iterations: t.iterations,
                status: t.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let certificate = match trace.limit {
        Some(z) if trace.converged() => {
            let residuals = Residuals {
                a: g.eval(sys.a.apply(z), z, z)?,
                b: g.eval(sys.b.apply(z), z, z)?,
                s: g.eval(sys.s.apply(z), z, z)?,
                t: g.eval(sys.t.apply(z), z, z)?,
            };
            Some(FixedPointCertificate {
                z,
                accepted: residuals.max() <= opts.tol,
                residuals,
                rate_constant_used: c,
                uniqueness: uniqueness(g, sys, z, &starts, opts)?,
                continuity: continuity(g, sys, &trace, z, opts.continuity_tol)?,
                downgraded_by: failed,
            })
        }
        _ => None,
    };
    Ok(Solution {
        hypotheses,
        trace,
        rate,
        convergence,
        starts,
        certificate,
    })
}

fn uniqueness(
    g: &GMetric,
    sys: &MapSystem,
    z: f64,
    starts: &[StartOutcome],
    opts: &SolveOptions,
) -> Result<Uniqueness> {
    if sys.space().is_finite() {
        let all = brute_force_fixed_points(sys)?;
        return Ok(if all == [z] {
            Uniqueness::ProvedByEnumeration
        } else {
            Uniqueness::Contradicted {
                others: all.into_iter().filter(|&w| w != z).collect(),
                detail: "enumeration".into(),
            }
        });
    }
    if starts.is_empty() {
        return Ok(Uniqueness::NotChecked);
    }
    let mut others = Vec::new();
    let mut failed = Vec::new();
    for s in starts {
        match s.limit {
            Some(w) if s.status == TraceStatus::Converged => {
                if derived_metric(g, z, w)? > opts.agreement_tol {
                    others.push(w);
                }
            }
            _ => failed.push(s.x0),
        }
    }
    Ok(if others.is_empty() && failed.is_empty() {
        Uniqueness::UniqueOnSample {
            starts: starts.iter().map(|s| s.x0).collect(),
        }
    } else {
        Uniqueness::Contradicted {
            others,
            detail: if failed.is_empty() {
                "multi-start limits disagree".into()
            } else {
                format!("multi-start runs did not converge from {failed:?}")
            },
        }
    })
}

fn continuity(
    g: &GMetric,
    sys: &MapSystem,
    trace: &IterationTrace,
    z: f64,
    tol: f64,
) -> Result<Vec<ContinuityEvidence>> {
    let window = &trace.y_seq[trace.y_seq.len().saturating_sub(CONFIRMING_STEPS + 1)..];
    sys.roles()
        .into_iter()
        .map(|(role, m)| {
            let mz = m.apply(z);
            let mut dev: f64 = 0.0;
            for &y in window {
                dev = dev.max(g.eval(m.apply(y), mz, mz)?);
            }
            Ok(ContinuityEvidence {
                role: role.to_string(),
                max_deviation: dev,
                within_tol: dev <= tol,
            })
        })
        .collect()
}
