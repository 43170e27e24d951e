//! Point domains and the deterministic sampling plans used by every checker.
//!
//! Points are real numbers. A finite space is a list of distinct labeled
//! reals (labels default to the value, or values default to the index when
//! only labels are given); an interval space is `[lo, hi]` together with a
//! [`SamplingPlan`]. Finite spaces are enumerated exhaustively whenever the
//! tuple count stays under [`EXHAUSTIVE_LIMIT`]; intervals are always sampled.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tuple count enumerated exhaustively on a finite space.
pub const EXHAUSTIVE_LIMIT: usize = 2_000_000;

// Per-purpose salts so different sample families never share a stream.
const SALT_POINTS: u64 = 0x9e37_79b9_7f4a_7c15;
const SALT_PAIRS: u64 = 0xbf58_476d_1ce4_e5b9;
const SALT_TUPLES: u64 = 0x94d0_49bb_1331_11eb;
const SALT_AUX: u64 = 0x2545_f491_4f6c_dd1d;

/// Absolute tolerances for value comparisons and for point identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub value: f64,
    pub point: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            value: 1e-9,
            point: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Tolerance { value: tol, point: tol }
    }

    pub fn same_point(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.point
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub label: String,
    pub value: f64,
}

/// How an interval is sampled.
///
/// Points are a uniform `grid` (endpoints included) followed by `random`
/// seeded uniform draws. Pairs are the grid squared plus `random` seeded
/// pairs. Higher-arity tuples and auxiliary points are seeded draws from the
/// point pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    pub grid: usize,
    pub random: usize,
    pub seed: u64,
    /// Number of sampled triples / 5-tuples on intervals (or oversized finite spaces).
    pub tuples: usize,
    /// Auxiliary points drawn per triple for the rectangle axiom.
    pub aux_per_triple: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            grid: 101,
            random: 400,
            seed: 0,
            tuples: 10_000,
            aux_per_triple: 32,
        }
    }
}

impl SamplingPlan {
    pub fn grid_only(n: usize) -> Self {
        SamplingPlan {
            grid: n,
            random: 0,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Finite { points: Vec<LabeledPoint> },
    Interval { lo: f64, hi: f64 },
}

/// A sample together with whether it covers the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub items: Vec<T>,
    pub exhaustive: bool,
}

impl<T> Sample<T> {
    pub fn new(items: Vec<T>) -> Self {
        Sample {
            items,
            exhaustive: false,
        }
    }

    pub fn exhaustive(items: Vec<T>) -> Self {
        Sample {
            items,
            exhaustive: true,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub domain: Domain,
    #[serde(default)]
    pub plan: SamplingPlan,
}

impl SpaceDescriptor {
    pub fn finite(points: Vec<LabeledPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpace("a finite space needs at least one point".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.value.is_finite() {
                return Err(Error::InvalidSpace(format!("point `{}` is not finite", p.label)));
            }
            if let Some(q) = points[..i].iter().find(|q| q.value == p.value || q.label == p.label) {
                return Err(Error::InvalidSpace(format!(
                    "points `{}` and `{}` are not distinct",
                    q.label, p.label
                )));
            }
        }
        Ok(SpaceDescriptor {
            domain: Domain::Finite { points },
            plan: SamplingPlan::default(),
        })
    }

    /// Finite space of labels; the value of the `i`-th label is `i`.
    pub fn labeled<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::finite(
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| LabeledPoint {
                    label: l.as_ref().to_string(),
                    value: i as f64,
                })
                .collect(),
        )
    }

    /// Finite space of reals labeled by their value.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::finite(
            values
                .iter()
                .map(|&v| LabeledPoint {
                    label: format!("{v}"),
                    value: v,
                })
                .collect(),
        )
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSpace(format!(
                "interval needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(SpaceDescriptor {
            domain: Domain::Interval { lo, hi },
            plan: SamplingPlan::default(),
        })
    }

    pub fn with_plan(mut self, plan: SamplingPlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.plan.seed = seed;
        self
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.domain, Domain::Finite { .. })
    }

    pub fn finite_points(&self) -> Option<&[LabeledPoint]> {
        match &self.domain {
            Domain::Finite { points } => Some(points),
            Domain::Interval { .. } => None,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match &self.domain {
            Domain::Interval { lo, hi } => (*lo, *hi),
            Domain::Finite { points } => points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.value), hi.max(p.value))
            }),
        }
    }

    pub fn contains(&self, x: f64, tol: &Tolerance) -> bool {
        if !x.is_finite() {
            return false;
        }
        match &self.domain {
            Domain::Finite { points } => points.iter().any(|p| tol.same_point(p.value, x)),
            Domain::Interval { lo, hi } => x >= lo - tol.point && x <= hi + tol.point,
        }
    }

    /// Index of `x` among the finite points, matching within the point tolerance.
    pub fn index_of(&self, x: f64, tol: &Tolerance) -> Option<usize> {
        self.finite_points()?.iter().position(|p| tol.same_point(p.value, x))
    }

    /// Human label of a point: its finite label, or the number itself.
    pub fn label(&self, x: f64) -> String {
        match self.finite_points() {
            Some(points) => points
                .iter()
                .find(|p| p.value == x)
                .map(|p| p.label.clone())
                .unwrap_or_else(|| format!("{x}")),
            None => format!("{x}"),
        }
    }

    /// Point with a given label (finite spaces only).
    pub fn point(&self, label: &str) -> Option<f64> {
        self.finite_points()?.iter().find(|p| p.label == label).map(|p| p.value)
    }

    pub fn grid(&self) -> Vec<f64> {
        match &self.domain {
            Domain::Finite { points } => points.iter().map(|p| p.value).collect(),
            Domain::Interval { lo, hi } => uniform_grid(*lo, *hi, self.plan.grid),
        }
    }

    /// The point pool: all points of a finite space, grid plus seeded draws on an interval.
    pub fn points(&self) -> Vec<f64> {
        match &self.domain {
            Domain::Finite { points } => points.iter().map(|p| p.value).collect(),
            Domain::Interval { lo, hi } => {
                let mut out = uniform_grid(*lo, *hi, self.plan.grid);
                let mut rng = self.plan.rng(SALT_POINTS);
                out.extend((0..self.plan.random).map(|_| rng.random_range(*lo..=*hi)));
                out
            }
        }
    }

    pub fn pairs(&self) -> Sample<(f64, f64)> {
        match &self.domain {
            Domain::Finite { points } => {
                let values: Vec<f64> = points.iter().map(|p| p.value).collect();
                let items = values
                    .iter()
                    .flat_map(|&x| values.iter().map(move |&y| (x, y)))
                    .collect();
                Sample::exhaustive(items)
            }
            Domain::Interval { .. } => {
                let grid = self.grid();
                let pool = self.points();
                let mut items: Vec<(f64, f64)> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect();
                let mut rng = self.plan.rng(SALT_PAIRS);
                for _ in 0..self.plan.random {
                    let x = *pool.choose(&mut rng).expect("non-empty pool");
                    let y = *pool.choose(&mut rng).expect("non-empty pool");
                    items.push((x, y));
                }
                Sample::new(items)
            }
        }
    }

    pub fn triples(&self) -> Sample<[f64; 3]> {
        self.tuples::<3>()
    }

    /// `K`-tuples of points: the full product on small finite spaces,
    /// otherwise `plan.tuples` seeded draws. Each drawn slot after the first
    /// copies an earlier slot with probability 1/3, so repeated-point patterns
    /// such as `(x, x, y)` and `(x, y, y)` are well represented.
    pub fn tuples<const K: usize>(&self) -> Sample<[f64; K]> {
        let pool = self.points();
        let n = pool.len();
        let total = n.checked_pow(K as u32);
        if self.is_finite() && total.is_some_and(|t| t <= EXHAUSTIVE_LIMIT) {
            let total = total.unwrap_or(0);
            let items = (0..total)
                .map(|mut code| {
                    let mut t = [0.0; K];
                    for slot in t.iter_mut().rev() {
                        *slot = pool[code % n];
                        code /= n;
                    }
                    t
                })
                .collect();
            return Sample::exhaustive(items);
        }
        let mut rng = self.plan.rng(SALT_TUPLES ^ K as u64);
        let items = (0..self.plan.tuples)
            .map(|_| {
                let mut t = [0.0; K];
                for j in 0..K {
                    t[j] = if j > 0 && rng.random_ratio(1, 3) {
                        t[rng.random_range(0..j)]
                    } else {
                        pool[rng.random_range(0..n)]
                    };
                }
                t
            })
            .collect();
        Sample::new(items)
    }

    /// Auxiliary points for the `index`-th sampled triple: every point on a
    /// finite space, `plan.aux_per_triple` seeded draws on an interval.
    pub fn aux_points(&self, pool: &[f64], index: usize) -> Vec<f64> {
        if self.is_finite() {
            return pool.to_vec();
        }
        let mut rng = self
            .plan
            .rng(SALT_AUX ^ (index as u64).wrapping_mul(0x0000_0100_0000_01b3));
        (0..self.plan.aux_per_triple)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect()
    }
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64) / last
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_spaces() {
        assert!(SpaceDescriptor::interval(1.0, 1.0).is_err());
        assert!(SpaceDescriptor::interval(0.0, f64::INFINITY).is_err());
        assert!(SpaceDescriptor::labeled::<&str>(&[]).is_err());
        assert!(SpaceDescriptor::from_values(&[0.0, 0.0]).is_err());
        assert!(SpaceDescriptor::labeled(&["a", "a"]).is_err());
    }

    #[test]
    fn grid_hits_endpoints() {
        let s = SpaceDescriptor::interval(0.0, 1.0).unwrap();
        let g = s.grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((g[25] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn samples_stay_in_domain() {
        let s = SpaceDescriptor::interval(-2.0, 3.0).unwrap().with_seed(7);
        let tol = Tolerance::default();
        assert!(s.points().iter().all(|&x| s.contains(x, &tol)));
        assert!(s.tuples::<5>().iter().flatten().all(|&x| (-2.0..=3.0).contains(&x)));
        assert_eq!(s.triples().len(), 10_000);
    }

    #[test]
    fn finite_tuples_are_exhaustive() {
        let s = SpaceDescriptor::labeled(&["a", "b", "c"]).unwrap();
        let t = s.triples();
        assert!(t.exhaustive);
        assert_eq!(t.len(), 27);
        assert_eq!(t.items[0], [0.0, 0.0, 0.0]);
        assert_eq!(t.items[26], [2.0, 2.0, 2.0]);
        assert_eq!(s.tuples::<5>().len(), 243);
        assert_eq!(s.pairs().len(), 9);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = SpaceDescriptor::interval(0.0, 1.0).unwrap().with_seed(11);
        let b = SpaceDescriptor::interval(0.0, 1.0).unwrap().with_seed(11);
        let c = SpaceDescriptor::interval(0.0, 1.0).unwrap().with_seed(12);
        assert_eq!(a.triples(), b.triples());
        assert_ne!(a.triples(), c.triples());
        assert_eq!(a.aux_points(&a.points(), 5), b.aux_points(&b.points(), 5));
    }

    #[test]
    fn drawn_tuples_contain_repeated_patterns() {
        let s = SpaceDescriptor::interval(0.0, 1.0).unwrap();
        let t = s.triples();
        let xxy = t.iter().filter(|t| t[0] == t[1] && t[1] != t[2]).count();
        let xyy = t.iter().filter(|t| t[1] == t[2] && t[0] != t[1]).count();
        assert!(xxy > 500 && xyy > 500, "xxy {xxy}, xyy {xyy}");
    }

    #[test]
    fn labels_round_trip() {
        let s = SpaceDescriptor::labeled(&["a", "b"]).unwrap();
        assert_eq!(s.point("b"), Some(1.0));
        assert_eq!(s.label(1.0), "b");
        assert_eq!(s.index_of(1.0, &Tolerance::default()), Some(1));
    }
}
