//! Self-maps, the four-role [`MapSystem`], preimage solving and the
//! hypothesis checks on pairs of maps (weak commutativity and range
//! inclusion).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gmetric::GMetric;
use crate::report::{CheckReport, Violation};
use crate::space::{SpaceDescriptor, Tolerance};

type UnaryFn = dyn Fn(f64) -> f64 + Send + Sync;
type PreimageFn = dyn Fn(f64) -> Option<f64> + Send + Sync;

/// Points in the monotonicity probe for bisection.
pub const MONOTONE_PROBE: usize = 101;
const BISECTION_STEPS: usize = 200;

#[derive(Clone)]
pub struct SelfMap {
    label: String,
    space: SpaceDescriptor,
    apply: Arc<UnaryFn>,
    preimage: Option<Arc<PreimageFn>>,
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap")
            .field("label", &self.label)
            .field("has_preimage", &self.preimage.is_some())
            .finish()
    }
}

impl SelfMap {
    pub fn new(
        label: impl Into<String>,
        space: SpaceDescriptor,
        apply: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SelfMap {
            label: label.into(),
            space,
            apply: Arc::new(apply),
            preimage: None,
        }
    }

    /// Attaches an oracle returning some `x` with `apply(x) = t`, or `None`.
    pub fn with_preimage(mut self, oracle: impl Fn(f64) -> Option<f64> + Send + Sync + 'static) -> Self {
        self.preimage = Some(Arc::new(oracle));
        self
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        SelfMap::new("identity", space, |x| x).with_preimage(Some)
    }

    pub fn constant(space: SpaceDescriptor, c: f64) -> Self {
        let (lo, _) = space.bounds();
        let first = space.finite_points().map(|p| p[0].value).unwrap_or(lo);
        SelfMap::new(format!("const {c}"), space, move |_| c).with_preimage(move |t| (t == c).then_some(first))
    }

    /// `x -> slope * x + intercept`, with the closed-form inverse when `slope != 0`.
    pub fn affine(space: SpaceDescriptor, slope: f64, intercept: f64) -> Self {
        if slope == 0.0 {
            return SelfMap::constant(space, intercept);
        }
        let (lo, hi) = space.bounds();
        SelfMap::new(format!("{slope}x + {intercept}"), space, move |x| slope * x + intercept).with_preimage(move |t| {
            let x = (t - intercept) / slope;
            // Snap round-off just outside the domain back onto it.
            let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
            (x >= lo - slack && x <= hi + slack).then(|| x.clamp(lo, hi))
        })
    }

    /// `x -> x / divisor`, exact for the usual rational test maps.
    pub fn divide(space: SpaceDescriptor, divisor: f64) -> Self {
        let (lo, hi) = space.bounds();
        SelfMap::new(format!("x/{divisor}"), space, move |x| x / divisor).with_preimage(move |t| {
            let x = t * divisor;
            (x >= lo && x <= hi).then_some(x)
        })
    }

    /// Map on a finite space given as `(from, to)` label pairs covering every point.
    pub fn table(space: SpaceDescriptor, pairs: &[(&str, &str)]) -> Result<Self> {
        let points = space.finite_points().ok_or(Error::Unsupported("a map table"))?;
        let mut image = vec![None; points.len()];
        for (from, to) in pairs {
            let i = space
                .finite_points()
                .and_then(|p| p.iter().position(|q| q.label == *from))
                .ok_or_else(|| Error::InvalidSpace(format!("unknown point `{from}`")))?;
            let v = space
                .point(to)
                .ok_or_else(|| Error::InvalidSpace(format!("unknown point `{to}`")))?;
            image[i] = Some(v);
        }
        let domain: Vec<f64> = points.iter().map(|p| p.value).collect();
        let image: Vec<f64> = image
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::InvalidSpace(format!("no image for `{}`", points[i].label))))
            .collect::<Result<_>>()?;
        Ok(Self::lookup("table", space, domain, image))
    }

    /// Map on a finite space from parallel domain/image value lists.
    pub fn lookup(label: impl Into<String>, space: SpaceDescriptor, domain: Vec<f64>, image: Vec<f64>) -> Self {
        let d = domain.clone();
        let im = image.clone();
        SelfMap::new(label, space, move |x| match d.iter().position(|&p| p == x) {
            Some(i) => im[i],
            None => f64::NAN,
        })
        .with_preimage(move |t| image.iter().position(|&v| v == t).map(|i| domain[i]))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn has_preimage(&self) -> bool {
        self.preimage.is_some()
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.apply)(x)
    }

    /// Every sampled point must land in the space; with an oracle, the oracle
    /// must invert the map on the sampled images.
    pub fn validate(&self, points: &[f64], tol: &Tolerance) -> CheckReport {
        let mut report = CheckReport::new();
        for &x in points {
            let y = self.apply(x);
            report.tested();
            if !self.space.contains(y, tol) {
                report.violate(Violation::new("maps-into-space", &[x], y, f64::NAN));
                continue;
            }
            if let Some(oracle) = &self.preimage {
                report.tested();
                match oracle(y) {
                    Some(p) if (self.apply(p) - y).abs() <= tol.value => {}
                    Some(p) => report.violate(Violation::new("preimage-round-trip", &[y, p], self.apply(p), y)),
                    None => report.violate(Violation::new("preimage-round-trip", &[y], f64::NAN, y)),
                }
            }
        }
        report.finish()
    }
}

/// The four maps `A, B, S, T`. One map may fill several roles; aliasing is
/// by shared [`Arc`] and is how the specialized corollary settings are
/// expressed (`S = T`, `A = B`, `A = B = identity`).
#[derive(Debug, Clone)]
pub struct MapSystem {
    pub a: Arc<SelfMap>,
    pub b: Arc<SelfMap>,
    pub s: Arc<SelfMap>,
    pub t: Arc<SelfMap>,
}

impl MapSystem {
    pub fn new(a: Arc<SelfMap>, b: Arc<SelfMap>, s: Arc<SelfMap>, t: Arc<SelfMap>) -> Result<Self> {
        let sys = MapSystem { a, b, s, t };
        let space = sys.a.space();
        let tol = Tolerance::default();
        let points = space.points();
        for (role, m) in sys.roles() {
            if m.space() != space {
                return Err(Error::SpaceMismatch(format!("{role} differs from A")));
            }
            if let Some(&x) = points.iter().find(|&&x| !space.contains(m.apply(x), &tol)) {
                return Err(Error::NotSelfMap {
                    map: format!("{role} ({})", m.label()),
                    x,
                    image: m.apply(x),
                });
            }
        }
        Ok(sys)
    }

    /// `T = S`.
    pub fn with_s_equal_t(a: SelfMap, b: SelfMap, s: SelfMap) -> Result<Self> {
        let s = Arc::new(s);
        Self::new(Arc::new(a), Arc::new(b), Arc::clone(&s), s)
    }

    /// `B = A`.
    pub fn with_a_equal_b(a: SelfMap, s: SelfMap, t: SelfMap) -> Result<Self> {
        let a = Arc::new(a);
        Self::new(Arc::clone(&a), a, Arc::new(s), Arc::new(t))
    }

    /// `A = B = identity`.
    pub fn with_identity_ab(s: SelfMap, t: SelfMap) -> Result<Self> {
        let id = Arc::new(SelfMap::identity(s.space().clone()));
        Self::new(Arc::clone(&id), id, Arc::new(s), Arc::new(t))
    }

    /// `A = B = identity` and `T = S`: a single self-map.
    pub fn single(s: SelfMap) -> Result<Self> {
        let id = Arc::new(SelfMap::identity(s.space().clone()));
        let s = Arc::new(s);
        Self::new(Arc::clone(&id), id, Arc::clone(&s), s)
    }

    pub fn from_maps(a: SelfMap, b: SelfMap, s: SelfMap, t: SelfMap) -> Result<Self> {
        Self::new(Arc::new(a), Arc::new(b), Arc::new(s), Arc::new(t))
    }

    pub fn space(&self) -> &SpaceDescriptor {
        self.a.space()
    }

    pub fn roles(&self) -> [(&'static str, &SelfMap); 4] {
        [("A", &self.a), ("B", &self.b), ("S", &self.s), ("T", &self.t)]
    }

    /// Role pairs that share one map, e.g. `[("S", "T")]`.
    pub fn aliases(&self) -> Vec<(&'static str, &'static str)> {
        let roles = [("A", &self.a), ("B", &self.b), ("S", &self.s), ("T", &self.t)];
        let mut out = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                if Arc::ptr_eq(roles[i].1, roles[j].1) {
                    out.push((roles[i].0, roles[j].0));
                }
            }
        }
        out
    }
}

/// Checks `G(f(h x), h(f x), h(f x)) <= G(f x, h x, h x)` at every sampled `x`.
///
/// When `f` and `h` are the same map the left side is `G(w, w, w) = 0`, so
/// the check is settled without evaluation.
pub fn check_weakly_commuting(
    g: &GMetric,
    f: &SelfMap,
    h: &SelfMap,
    points: &[f64],
    tol: &Tolerance,
) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    if std::ptr::eq(f, h) {
        report.checked = points.len();
        return Ok(report.finish());
    }
    for &x in points {
        let (fx, hx) = (f.apply(x), h.apply(x));
        let (fhx, hfx) = (f.apply(hx), h.apply(fx));
        let lhs = g.eval(fhx, hfx, hfx)?;
        let rhs = g.eval(fx, hx, hx)?;
        report.expect_le("weakly-commuting", &[x], lhs, rhs, tol.value);
    }
    Ok(report.finish())
}

/// Checks that the image of `f` lies inside the image of `h`.
///
/// On a finite space this is an exact image comparison. On an interval each
/// sampled `f(x)` is pulled back through [`preimage_solve`]; when `h` is
/// neither invertible by oracle nor monotone the report is inconclusive.
pub fn check_range_inclusion(f: &SelfMap, h: &SelfMap, points: &[f64], tol: &Tolerance) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    if std::ptr::eq(f, h) {
        report.checked = points.len();
        return Ok(report.finish());
    }
    let space = h.space();
    if let Some(finite) = space.finite_points() {
        let image: Vec<f64> = finite.iter().map(|p| h.apply(p.value)).collect();
        for &x in points {
            let t = f.apply(x);
            let gap = image.iter().map(|&v| (v - t).abs()).fold(f64::INFINITY, f64::min);
            report.expect_le("range-inclusion", &[x, t], gap, 0.0, tol.point);
        }
        return Ok(report.finish());
    }
    for &x in points {
        let t = f.apply(x);
        match preimage_solve(h, t, tol) {
            Ok(_) => report.tested(),
            Err(Error::NoPreimage { .. }) => {
                report.tested();
                report.violate(Violation::new("range-inclusion", &[x, t], f64::INFINITY, 0.0));
            }
            Err(Error::NotMonotone(map)) => {
                return Ok(CheckReport::inconclusive(format!(
                    "`{map}` has no preimage oracle and is not monotone"
                )))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report.finish())
}

/// Finds `x` in the space with `|m(x) - t| <= tol`.
///
/// Uses the map's oracle when present, exhaustive search on a finite space,
/// and bisection on an interval when the map is monotone on a
/// [`MONOTONE_PROBE`]-point grid.
pub fn preimage_solve(m: &SelfMap, t: f64, tol: &Tolerance) -> Result<f64> {
    let space = m.space();
    let no = || Error::NoPreimage {
        map: m.label.clone(),
        target: t,
    };
    let accept = |x: f64| space.contains(x, tol) && (m.apply(x) - t).abs() <= tol.value;
    if let Some(oracle) = &m.preimage {
        return oracle(t).filter(|&x| accept(x)).ok_or_else(no);
    }
    if let Some(points) = space.finite_points() {
        return points.iter().map(|p| p.value).find(|&x| accept(x)).ok_or_else(no);
    }
    let (lo, hi) = space.bounds();
    let probe: Vec<f64> = SpaceDescriptor::interval(lo, hi)?
        .with_plan(crate::space::SamplingPlan::grid_only(MONOTONE_PROBE))
        .grid()
        .into_iter()
        .map(|x| m.apply(x))
        .collect();
    let increasing = probe.windows(2).all(|w| w[1] >= w[0] - tol.value);
    let decreasing = probe.windows(2).all(|w| w[1] <= w[0] + tol.value);
    if !(increasing || decreasing) {
        return Err(Error::NotMonotone(m.label.clone()));
    }
    // Orient so that the bracket runs from the small end of the range.
    let (mut a, mut b) = if increasing { (lo, hi) } else { (hi, lo) };
    for x in [a, b] {
        if accept(x) {
            return Ok(x);
        }
    }
    if t < m.apply(a) || t > m.apply(b) {
        return Err(no());
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if accept(mid) {
            return Ok(mid);
        }
        if m.apply(mid) < t {
            a = mid;
        } else {
            b = mid;
        }
    }
    [a, b].into_iter().find(|&x| accept(x)).ok_or_else(no)
}
