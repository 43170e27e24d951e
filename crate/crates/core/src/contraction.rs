//! Checkers and estimators for the max-form and sum-form contraction
//! hypotheses on a [`MapSystem`].
//!
//! Max form, constant `h` in `[0, 1)`:
//!
//! ```text
//! G(Sx, Ty, Ty) <= h * max{ G(Ax, By, By), G(Sx, Ax, Ax), G(Ty, By, By) }
//! G(Sx, Sx, Ty) <= h * max{ G(Ax, Ax, By), G(Sx, Sx, Ax), G(Ty, Ty, By) }
//! ```
//!
//! Sum form, constant `k` in `[0, 1/2)`:
//!
//! ```text
//! G(Sx, Ty, Ty) <= k * ( G(Sx, Ax, Ax) + G(Ty, By, By) )
//! G(Sx, Sx, Ty) <= k * ( G(Sx, Sx, Ax) + G(Ty, Ty, By) )
//! ```
//!
//! Both inequalities of a form are checked independently at every sampled
//! pair `(x, y)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmetric::GMetric;
use crate::maps::MapSystem;
use crate::report::{worst, Violation};
use crate::space::{Sample, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionForm {
    Max,
    Sum,
}

impl ContractionForm {
    /// Exclusive upper bound on the constant.
    pub fn bound(self) -> f64 {
        match self {
            ContractionForm::Max => 1.0,
            ContractionForm::Sum => 0.5,
        }
    }

    /// Rule names of the two inequalities.
    pub fn rules(self) -> [&'static str; 2] {
        match self {
            ContractionForm::Max => ["max-first", "max-second"],
            ContractionForm::Sum => ["sum-first", "sum-second"],
        }
    }

    /// Rejects constants outside `[0, bound)`.
    pub fn validate(self, constant: f64) -> Result<()> {
        if (0.0..self.bound()).contains(&constant) {
            Ok(())
        } else {
            Err(Error::ConstantOutOfRange {
                name: match self {
                    ContractionForm::Max => "h",
                    ContractionForm::Sum => "kappa",
                },
                value: constant,
                range: match self {
                    ContractionForm::Max => "[0, 1)",
                    ContractionForm::Sum => "[0, 1/2)",
                },
            })
        }
    }
}

impl fmt::Display for ContractionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionForm::Max => "max-form",
            ContractionForm::Sum => "sum-form",
        })
    }
}

/// Supremum of `lhs / term` over a sample, and where it was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    #[serde(with = "crate::report::extended_f64")]
    pub value: f64,
    pub witness: [f64; 2],
    pub rule: String,
    pub lhs: f64,
    pub term: f64,
    /// Pairs that entered the supremum.
    pub used: usize,
    /// Pairs skipped because both sides were within tolerance of zero.
    pub skipped: usize,
}

impl ConstantEstimate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub form: ContractionForm,
    pub constant: f64,
    pub checked: usize,
    /// Witness is `[x, y]`; `rhs` already includes the constant.
    pub violations: Vec<Violation>,
    pub passed: bool,
    pub min_constant_estimate: Option<ConstantEstimate>,
}

impl ContractionReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn violation_at(&self, x: f64, y: f64) -> Option<&Violation> {
        self.violations.iter().find(|v| v.witness == [x, y])
    }

    pub fn violations_of<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a Violation> + Clone + 'a {
        self.violations.iter().filter(move |v| v.rule == rule)
    }

    /// Largest-excess violation of each inequality, earliest witness on ties.
    pub fn worst_per_rule(&self) -> Vec<&Violation> {
        self.form
            .rules()
            .into_iter()
            .filter_map(|r| worst(self.violations_of(r)))
            .collect()
    }
}

/// The two `(lhs, term)` pairs at `(x, y)`; each inequality reads
/// `lhs <= constant * term`.
pub fn sides(g: &GMetric, sys: &MapSystem, form: ContractionForm, x: f64, y: f64) -> Result<[(f64, f64); 2]> {
    let (ax, sx) = (sys.a.apply(x), sys.s.apply(x));
    let (by, ty) = (sys.b.apply(y), sys.t.apply(y));
    let first_lhs = g.eval(sx, ty, ty)?;
    let second_lhs = g.eval(sx, sx, ty)?;
    Ok(match form {
        ContractionForm::Max => [
            (
                first_lhs,
                g.eval(ax, by, by)?.max(g.eval(sx, ax, ax)?).max(g.eval(ty, by, by)?),
            ),
            (
                second_lhs,
                g.eval(ax, ax, by)?.max(g.eval(sx, sx, ax)?).max(g.eval(ty, ty, by)?),
            ),
        ],
        ContractionForm::Sum => [
            (first_lhs, g.eval(sx, ax, ax)? + g.eval(ty, by, by)?),
            (second_lhs, g.eval(sx, sx, ax)? + g.eval(ty, ty, by)?),
        ],
    })
}

pub fn check_condition_max(
    g: &GMetric,
    sys: &MapSystem,
    h: f64,
    pairs: &Sample<(f64, f64)>,
    tol: &Tolerance,
) -> Result<ContractionReport> {
    check_condition(g, sys, ContractionForm::Max, h, pairs, tol)
}

pub fn check_condition_sum(
    g: &GMetric,
    sys: &MapSystem,
    kappa: f64,
    pairs: &Sample<(f64, f64)>,
    tol: &Tolerance,
) -> Result<ContractionReport> {
    check_condition(g, sys, ContractionForm::Sum, kappa, pairs, tol)
}

/// Tests both inequalities of `form` at every pair. The report also carries
/// the minimal-constant estimate over the same sample.
pub fn check_condition(
    g: &GMetric,
    sys: &MapSystem,
    form: ContractionForm,
    constant: f64,
    pairs: &Sample<(f64, f64)>,
    tol: &Tolerance,
) -> Result<ContractionReport> {
    form.validate(constant)?;
    evaluate_condition(g, sys, form, constant, pairs, tol)
}

/// [`check_condition`] without the range check on the constant, for
/// exploratory runs.
pub fn evaluate_condition(
    g: &GMetric,
    sys: &MapSystem,
    form: ContractionForm,
    constant: f64,
    pairs: &Sample<(f64, f64)>,
    tol: &Tolerance,
) -> Result<ContractionReport> {
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut est = Estimator::default();
    for &(x, y) in pairs.iter() {
        for (rule, (lhs, term)) in form.rules().into_iter().zip(sides(g, sys, form, x, y)?) {
            checked += 1;
            let rhs = constant * term;
            if lhs > rhs + tol.value {
                violations.push(Violation::new(rule, &[x, y], lhs, rhs));
            }
            est.observe(rule, x, y, lhs, term, tol.value);
        }
    }
    Ok(ContractionReport {
        form,
        constant,
        checked,
        passed: violations.is_empty(),
        violations,
        min_constant_estimate: est.finish().ok(),
    })
}

/// Supremum over the sample of `lhs / term` across both inequalities.
///
/// Pairs with both sides within `tol` of zero are skipped. A term within
/// `tol` of zero under a larger left side makes the estimate `+inf`. Ties
/// keep the earliest pair in sample order.
pub fn estimate_min_constant(
    g: &GMetric,
    sys: &MapSystem,
    form: ContractionForm,
    pairs: &Sample<(f64, f64)>,
    tol: &Tolerance,
) -> Result<ConstantEstimate> {
    let mut est = Estimator::default();
    for &(x, y) in pairs.iter() {
        for (rule, (lhs, term)) in form.rules().into_iter().zip(sides(g, sys, form, x, y)?) {
            est.observe(rule, x, y, lhs, term, tol.value);
        }
    }
    est.finish()
}

#[derive(Default)]
struct Estimator {
    best: Option<ConstantEstimate>,
    used: usize,
    skipped: usize,
}

impl Estimator {
    fn observe(&mut self, rule: &str, x: f64, y: f64, lhs: f64, term: f64, tol: f64) {
        if lhs <= tol && term <= tol {
            self.skipped += 1;
            return;
        }
        self.used += 1;
        let ratio = if term <= tol { f64::INFINITY } else { lhs / term };
        if self.best.as_ref().is_none_or(|b| ratio > b.value) {
            self.best = Some(ConstantEstimate {
                value: ratio,
                witness: [x, y],
                rule: rule.to_string(),
                lhs,
                term,
                used: 0,
                skipped: 0,
            });
        }
    }

    fn finish(self) -> Result<ConstantEstimate> {
        let mut best = self.best.ok_or(Error::InconclusiveEstimate)?;
        best.used = self.used;
        best.skipped = self.skipped;
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{from_metric_max, MetricFn};
    use crate::maps::SelfMap;
    use crate::space::{SamplingPlan, SpaceDescriptor};

    fn unit() -> SpaceDescriptor {
        SpaceDescriptor::interval(0.0, 1.0).unwrap()
    }

    fn g() -> GMetric {
        from_metric_max(&MetricFn::absolute(unit()).unwrap())
    }

    fn linear_system() -> MapSystem {
        let sp = unit();
        MapSystem::from_maps(
            SelfMap::divide(sp.clone(), 3.0),
            SelfMap::divide(sp.clone(), 6.0),
            SelfMap::divide(sp.clone(), 9.0),
            SelfMap::divide(sp, 12.0),
        )
        .unwrap()
    }

    fn single(x: f64, y: f64) -> Sample<(f64, f64)> {
        Sample::new(vec![(x, y)])
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn max_form_holds_at_one_zero() {
        let [(lhs, term), _] = sides(&g(), &linear_system(), ContractionForm::Max, 1.0, 0.0).unwrap();
        assert!(close(lhs, 1.0 / 9.0) && close(term, 1.0 / 3.0));
        let r = check_condition_max(&g(), &linear_system(), 0.5, &single(1.0, 0.0), &tol()).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn max_form_fails_at_zero_one_with_one_third() {
        let r = check_condition_max(&g(), &linear_system(), 1.0 / 3.0, &single(0.0, 1.0), &tol()).unwrap();
        let v = r.violations.iter().find(|v| v.rule == "max-first").unwrap();
        assert!(close(v.lhs, 1.0 / 12.0));
        assert!(close(v.rhs, 1.0 / 18.0));
    }

    #[test]
    fn origin_is_trivial() {
        let r = check_condition_max(&g(), &linear_system(), 0.0, &single(0.0, 0.0), &tol()).unwrap();
        assert!(r.passed);
        assert!(r.min_constant_estimate.is_none());
    }

    #[test]
    fn sum_form_fails_at_one_zero() {
        let r = check_condition_sum(&g(), &linear_system(), 0.25, &single(1.0, 0.0), &tol()).unwrap();
        let v = r.violations.iter().find(|v| v.rule == "sum-first").unwrap();
        assert!(close(v.lhs, 1.0 / 9.0));
        assert!(close(v.rhs, 1.0 / 18.0));
    }

    #[test]
    fn sum_form_constant_maps() {
        let sp = unit();
        let sys = MapSystem::with_identity_ab(SelfMap::constant(sp.clone(), 0.3), SelfMap::constant(sp.clone(), 0.3))
            .unwrap();
        let r = check_condition_sum(&g(), &sys, 0.25, &sp.pairs(), &tol()).unwrap();
        assert!(r.passed);
        let e = estimate_min_constant(&g(), &sys, ContractionForm::Sum, &sp.pairs(), &tol()).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn identity_system() {
        let sp = unit();
        let id = SelfMap::identity(sp.clone());
        let sys = MapSystem::single(id).unwrap();
        let r = check_condition_sum(&g(), &sys, 0.25, &sp.pairs(), &tol()).unwrap();
        assert!(r.violations.iter().all(|v| v.witness[0] != v.witness[1]));
        assert!(r.violations.iter().any(|v| v.witness == [0.0, 1.0]));
        let e = estimate_min_constant(&g(), &sys, ContractionForm::Sum, &sp.pairs(), &tol()).unwrap();
        assert_eq!(e.value, f64::INFINITY);
        // The max form's first term is G(Ax, By, By) = G(x, y, y), the left side itself.
        let e = estimate_min_constant(&g(), &sys, ContractionForm::Max, &sp.pairs(), &tol()).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn constants_out_of_range() {
        let s = single(0.0, 0.0);
        assert!(check_condition_max(&g(), &linear_system(), 1.0, &s, &tol()).is_err());
        assert!(check_condition_sum(&g(), &linear_system(), 0.5, &s, &tol()).is_err());
        assert!(check_condition_sum(&g(), &linear_system(), -0.1, &s, &tol()).is_err());
    }

    #[test]
    fn grid_supremum_matches_direct_scan() {
        let sp = unit().with_plan(SamplingPlan::grid_only(101));
        let pairs = sp.pairs();
        let e = estimate_min_constant(&g(), &linear_system(), ContractionForm::Max, &pairs, &tol()).unwrap();
        // Independent scan of the first inequality in closed form.
        let mut best = 0.0f64;
        for &(x, y) in pairs.iter() {
            let lhs = (x / 9.0 - y / 12.0).abs();
            let rhs = (x / 3.0 - y / 6.0).abs().max(2.0 * x / 9.0).max(y / 12.0);
            if rhs > 1e-9 {
                best = best.max(lhs / rhs);
            }
        }
        assert!((e.value - best).abs() < 1e-12);
        assert!((e.value - 2.0 / 3.0).abs() < 1e-12);
        assert!(
            check_condition_max(&g(), &linear_system(), e.value, &pairs, &tol())
                .unwrap()
                .passed
        );
    }
}
