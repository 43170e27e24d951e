//! G-metric spaces: the ternary distance, its five axioms, symmetry, the
//! induced binary metric `d_G`, and the standard consequences of the axioms.
//!
//! Every check here works on an explicit [`Sample`] so callers decide between
//! exhaustive enumeration (finite spaces) and seeded sampling (intervals).
//! Values returned by the user function are validated on every call: a
//! negative, NaN or infinite value aborts the check with
//! [`Error::InvalidValue`] instead of producing a report.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{CheckReport, Violation};
use crate::space::{Sample, SpaceDescriptor, Tolerance};

pub(crate) type TernaryFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Evidence level for `G(x,y,y) = G(y,x,x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Symmetry {
    /// Holds everywhere: by construction or by an exhaustive check.
    Yes,
    /// Holds on every sampled pair of an interval; never a proof.
    YesOnSample,
    /// Fails at `(x, y)` with `G(x,y,y) = forward` and `G(y,x,x) = backward`.
    No {
        x: f64,
        y: f64,
        forward: f64,
        backward: f64,
    },
    Unknown,
}

impl Symmetry {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, Symmetry::Yes | Symmetry::YesOnSample)
    }
}

/// A G-metric on a [`SpaceDescriptor`].
#[derive(Clone)]
pub struct GMetric {
    name: String,
    space: SpaceDescriptor,
    eval: Arc<TernaryFn>,
    symmetry: Symmetry,
}

impl fmt::Debug for GMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GMetric")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

impl GMetric {
    pub fn new(
        name: impl Into<String>,
        space: SpaceDescriptor,
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GMetric {
            name: name.into(),
            space,
            eval: Arc::new(eval),
            symmetry: Symmetry::Unknown,
        }
    }

    pub(crate) fn from_arc(name: String, space: SpaceDescriptor, eval: Arc<TernaryFn>) -> Self {
        GMetric {
            name,
            space,
            eval,
            symmetry: Symmetry::Unknown,
        }
    }

    /// Declares the symmetry status known from the construction.
    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    /// The declared symmetry, which may be [`Symmetry::Unknown`].
    pub fn declared_symmetry(&self) -> &Symmetry {
        &self.symmetry
    }

    pub(crate) fn raw(&self) -> Arc<TernaryFn> {
        Arc::clone(&self.eval)
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let value = (self.eval)(x, y, z);
        if value.is_finite() && value >= 0.0 {
            Ok(value)
        } else {
            Err(Error::InvalidValue {
                metric: self.name.clone(),
                args: vec![x, y, z],
                value,
            })
        }
    }

    /// Symmetry status on the space's own sample, using the declaration when present.
    pub fn resolve_symmetry(&self, tol: &Tolerance) -> Result<Symmetry> {
        match &self.symmetry {
            Symmetry::Unknown => is_symmetric(self, &self.space.pairs(), tol),
            known => Ok(known.clone()),
        }
    }
}

/// Checks the five G-metric axioms on sampled triples.
///
/// * G1: `G(x,x,x) = 0` for the first point of every triple.
/// * G2: `G(x,y,z) > tol` whenever `x` and `y` differ by more than the point tolerance.
/// * G3: `G(x,x,y) <= G(x,y,z)` whenever `y` and `z` differ.
/// * G4: all six permutations agree.
/// * G5: `G(x,y,z) <= G(x,a,a) + G(a,y,z)` over every point `a` of a finite
///   space, or `plan.aux_per_triple` seeded points on an interval.
pub fn check_axioms(g: &GMetric, triples: &Sample<[f64; 3]>, tol: &Tolerance) -> Result<CheckReport> {
    let space = g.space();
    let pool = space.points();
    let t = tol.value;
    let mut report = CheckReport::new();
    for (index, &[x, y, z]) in triples.iter().enumerate() {
        let w = [x, y, z];
        let v = g.eval(x, y, z)?;

        let diag = g.eval(x, x, x)?;
        report.expect_le("G1", &[x, x, x], diag, 0.0, t);

        if !tol.same_point(x, y) {
            report.tested();
            if v <= t {
                report.violate(Violation::new("G2", &w, 0.0, v));
            }
        }

        if !tol.same_point(y, z) {
            report.expect_le("G3", &w, g.eval(x, x, y)?, v, t);
        }

        for p in permutations(w) {
            let pv = g.eval(p[0], p[1], p[2])?;
            report.tested();
            if (pv - v).abs() > t {
                report.violate(Violation::new("G4", &[x, y, z, p[0], p[1], p[2]], v, pv));
            }
        }

        for a in space.aux_points(&pool, index) {
            let rhs = g.eval(x, a, a)? + g.eval(a, y, z)?;
            report.expect_le("G5", &[x, y, z, a], v, rhs, t);
        }
    }
    Ok(report.finish())
}

fn permutations([x, y, z]: [f64; 3]) -> [[f64; 3]; 5] {
    [[x, z, y], [y, x, z], [y, z, x], [z, x, y], [z, y, x]]
}

/// Looks for a pair with `G(x,y,y) != G(y,x,x)`.
///
/// The first offending pair in sample order becomes the witness. Without one,
/// the answer is [`Symmetry::Yes`] for an exhaustive sample and
/// [`Symmetry::YesOnSample`] otherwise.
pub fn is_symmetric(g: &GMetric, pairs: &Sample<(f64, f64)>, tol: &Tolerance) -> Result<Symmetry> {
    for &(x, y) in pairs.iter() {
        let forward = g.eval(x, y, y)?;
        let backward = g.eval(y, x, x)?;
        if (forward - backward).abs() > tol.value {
            return Ok(Symmetry::No {
                x,
                y,
                forward,
                backward,
            });
        }
    }
    Ok(if pairs.exhaustive || g.declared_symmetry() == &Symmetry::Yes {
        Symmetry::Yes
    } else {
        Symmetry::YesOnSample
    })
}

/// Every asymmetric pair `(x, y)` with `x` before `y` in sample order.
pub fn asymmetry_witnesses(g: &GMetric, pairs: &Sample<(f64, f64)>, tol: &Tolerance) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for &(x, y) in pairs.iter() {
        if x >= y {
            continue;
        }
        let forward = g.eval(x, y, y)?;
        let backward = g.eval(y, x, x)?;
        if (forward - backward).abs() > tol.value {
            out.push(Violation::new("symmetry", &[x, y], forward, backward));
        }
    }
    Ok(out)
}

/// `d_G(x, y) = G(x,y,y) + G(y,x,x)`.
pub fn derived_metric(g: &GMetric, x: f64, y: f64) -> Result<f64> {
    Ok(g.eval(x, y, y)? + g.eval(y, x, x)?)
}

/// Bounds relating `d_G` to `G`.
///
/// Symmetric metrics must satisfy `d_G(x,y) = 2 G(x,y,y)`; otherwise
/// `1.5 G(x,y,y) <= d_G(x,y) <= 3 G(x,y,y)`. Always `G(x,x,y) <= 2 G(x,y,y)`.
/// Symmetry is taken from the declaration, or decided on the same pairs.
pub fn check_dg_bounds(g: &GMetric, pairs: &Sample<(f64, f64)>, tol: &Tolerance) -> Result<CheckReport> {
    let symmetric = match g.declared_symmetry() {
        Symmetry::Unknown => is_symmetric(g, pairs, tol)?,
        known => known.clone(),
    }
    .is_symmetric();
    let t = tol.value;
    let mut report = CheckReport::new();
    for &(x, y) in pairs.iter() {
        let w = [x, y];
        let gxyy = g.eval(x, y, y)?;
        let d = derived_metric(g, x, y)?;
        if symmetric {
            report.tested();
            if (d - 2.0 * gxyy).abs() > t {
                report.violate(Violation::new("dG-equals-twice", &w, d, 2.0 * gxyy));
            }
        } else {
            report.expect_le("dG-lower", &w, 1.5 * gxyy, d, t);
            report.expect_le("dG-upper", &w, d, 3.0 * gxyy, t);
        }
        report.expect_le("orientation", &w, g.eval(x, x, y)?, 2.0 * gxyy, t);
    }
    Ok(report.finish())
}

/// The ten standard consequences of the axioms, evaluated on `(r, u, s, y, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasicProperty {
    /// `G(r,u,s) = 0` forces `r = u = s`.
    ZeroForcesEquality,
    /// `G(r,y,s) <= G(r,r,y) + G(r,r,s)`.
    SplitAtFirst,
    /// `G(r,r,u) <= 2 G(u,r,u)`.
    OrientationDoubling,
    /// `G(r,u,s) <= G(r,x,s) + G(x,u,s)`.
    Rectangle,
    /// `G(r,u,s) <= 2/3 (G(r,u,y) + G(r,y,s) + G(y,u,s))`.
    TwoThirdsAverage,
    /// `G(r,u,s) <= G(r,y,y) + G(y,u,y) + G(y,y,s)`.
    ThroughCommonPoint,
    /// `|G(r,u,s) - G(r,u,y)| <= max(G(y,s,s), G(s,y,y))`.
    ReplaceThirdMax,
    /// `|G(r,u,s) - G(r,u,x)| <= G(r,x,s)`.
    ReplaceThirdBound,
    /// `|G(r,u,s) - G(u,s,s)| <= max(G(r,s,s), G(s,r,r))`.
    CollapseFirst,
    /// `|G(r,y,y) - G(y,r,r)| <= max(G(y,r,r), G(r,y,y))`.
    OrientationGap,
}

impl BasicProperty {
    pub const ALL: [BasicProperty; 10] = [
        BasicProperty::ZeroForcesEquality,
        BasicProperty::SplitAtFirst,
        BasicProperty::OrientationDoubling,
        BasicProperty::Rectangle,
        BasicProperty::TwoThirdsAverage,
        BasicProperty::ThroughCommonPoint,
        BasicProperty::ReplaceThirdMax,
        BasicProperty::ReplaceThirdBound,
        BasicProperty::CollapseFirst,
        BasicProperty::OrientationGap,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BasicProperty::ZeroForcesEquality => "zero-forces-equality",
            BasicProperty::SplitAtFirst => "split-at-first",
            BasicProperty::OrientationDoubling => "orientation-doubling",
            BasicProperty::Rectangle => "rectangle",
            BasicProperty::TwoThirdsAverage => "two-thirds-average",
            BasicProperty::ThroughCommonPoint => "through-common-point",
            BasicProperty::ReplaceThirdMax => "replace-third-max",
            BasicProperty::ReplaceThirdBound => "replace-third-bound",
            BasicProperty::CollapseFirst => "collapse-first",
            BasicProperty::OrientationGap => "orientation-gap",
        }
    }

    /// Evaluates the property at one tuple, returning `(lhs, rhs)` of the
    /// failed relation, or `None` when it holds.
    pub fn test(self, g: &GMetric, tuple: [f64; 5], tol: &Tolerance) -> Result<Option<(f64, f64)>> {
        let [r, u, s, y, x] = tuple;
        let e = |a, b, c| g.eval(a, b, c);
        let le = |lhs: f64, rhs: f64| (lhs > rhs + tol.value).then_some((lhs, rhs));
        Ok(match self {
            BasicProperty::ZeroForcesEquality => {
                let v = e(r, u, s)?;
                let equal = tol.same_point(r, u) && tol.same_point(u, s);
                (v <= tol.value && !equal).then_some((v, 0.0))
            }
            BasicProperty::SplitAtFirst => le(e(r, y, s)?, e(r, r, y)? + e(r, r, s)?),
            BasicProperty::OrientationDoubling => le(e(r, r, u)?, 2.0 * e(u, r, u)?),
            BasicProperty::Rectangle => le(e(r, u, s)?, e(r, x, s)? + e(x, u, s)?),
            BasicProperty::TwoThirdsAverage => le(e(r, u, s)?, 2.0 / 3.0 * (e(r, u, y)? + e(r, y, s)? + e(y, u, s)?)),
            BasicProperty::ThroughCommonPoint => le(e(r, u, s)?, e(r, y, y)? + e(y, u, y)? + e(y, y, s)?),
            BasicProperty::ReplaceThirdMax => le((e(r, u, s)? - e(r, u, y)?).abs(), e(y, s, s)?.max(e(s, y, y)?)),
            BasicProperty::ReplaceThirdBound => le((e(r, u, s)? - e(r, u, x)?).abs(), e(r, x, s)?),
            BasicProperty::CollapseFirst => le((e(r, u, s)? - e(u, s, s)?).abs(), e(r, s, s)?.max(e(s, r, r)?)),
            BasicProperty::OrientationGap => {
                let (a, b) = (e(r, y, y)?, e(y, r, r)?);
                le((a - b).abs(), a.max(b))
            }
        })
    }
}

/// Instantiates all ten [`BasicProperty`] items on every sampled `(r,u,s,y,x)`.
pub fn check_basic_properties(g: &GMetric, tuples: &Sample<[f64; 5]>, tol: &Tolerance) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    for &tuple in tuples.iter() {
        for prop in BasicProperty::ALL {
            report.tested();
            if let Some((lhs, rhs)) = prop.test(g, tuple, tol)? {
                report.violate(Violation::new(prop.id(), &tuple, lhs, rhs));
            }
        }
    }
    Ok(report.finish())
}
