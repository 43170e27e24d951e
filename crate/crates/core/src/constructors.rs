//! Factories for concrete G-metrics: from a binary metric (sum and max of
//! the three sides), the discrete and max-value metrics, the four standard
//! transforms (scaling, truncation, normalization, partition shift), the
//! two-point non-symmetric construction and lookup tables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gmetric::{check_axioms, GMetric, Symmetry};
use crate::report::{CheckReport, Violation};
use crate::space::{SpaceDescriptor, Tolerance};

type BinaryFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A binary metric, validated on the space's sample when built.
#[derive(Clone)]
pub struct MetricFn {
    name: String,
    space: SpaceDescriptor,
    eval: Arc<BinaryFn>,
}

impl fmt::Debug for MetricFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricFn").field("name", &self.name).finish()
    }
}

impl MetricFn {
    /// Wraps `eval` after checking identity, symmetry and the triangle
    /// inequality on the space's triples.
    pub fn new(
        name: impl Into<String>,
        space: SpaceDescriptor,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = MetricFn {
            name: name.into(),
            space,
            eval: Arc::new(eval),
        };
        let report = d.check(&Tolerance::default())?;
        match report.first_violation() {
            None => Ok(d),
            Some(v) => Err(Error::InvalidMetric {
                name: d.name,
                violation: v.clone(),
            }),
        }
    }

    /// `|x - y|`.
    pub fn absolute(space: SpaceDescriptor) -> Result<Self> {
        Self::new("abs", space, |x, y| (x - y).abs())
    }

    /// 0 on the diagonal, 1 elsewhere.
    pub fn discrete(space: SpaceDescriptor) -> Result<Self> {
        Self::new("discrete", space, |x, y| if x == y { 0.0 } else { 1.0 })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let value = (self.eval)(x, y);
        if value.is_finite() && value >= 0.0 {
            Ok(value)
        } else {
            Err(Error::InvalidValue {
                metric: self.name.clone(),
                args: vec![x, y],
                value,
            })
        }
    }

    pub fn check(&self, tol: &Tolerance) -> Result<CheckReport> {
        let mut report = CheckReport::new();
        for &[x, y, z] in self.space.triples().iter() {
            report.expect_le("identity", &[x], self.eval(x, x)?, 0.0, tol.value);
            let (dxy, dyx) = (self.eval(x, y)?, self.eval(y, x)?);
            report.tested();
            if (dxy - dyx).abs() > tol.value {
                report.violate(Violation::new("symmetry", &[x, y], dxy, dyx));
            }
            let via = dxy + self.eval(y, z)?;
            report.expect_le("triangle", &[x, y, z], self.eval(x, z)?, via, tol.value);
        }
        Ok(report.finish())
    }
}

/// `G(x,y,z) = d(x,y) + d(y,z) + d(z,x)`.
pub fn from_metric_sum(d: &MetricFn) -> GMetric {
    let f = Arc::clone(&d.eval);
    GMetric::new(format!("sum-of-{}", d.name), d.space.clone(), move |x, y, z| {
        f(x, y) + f(y, z) + f(z, x)
    })
    .with_symmetry(Symmetry::Yes)
}

/// `G(x,y,z) = max{d(x,y), d(y,z), d(z,x)}`.
pub fn from_metric_max(d: &MetricFn) -> GMetric {
    let f = Arc::clone(&d.eval);
    GMetric::new(format!("max-of-{}", d.name), d.space.clone(), move |x, y, z| {
        f(x, y).max(f(y, z)).max(f(z, x))
    })
    .with_symmetry(Symmetry::Yes)
}

/// 0 on the diagonal, 1 on every other triple.
pub fn discrete(space: SpaceDescriptor) -> GMetric {
    GMetric::new("discrete", space, |x, y, z| if x == y && y == z { 0.0 } else { 1.0 }).with_symmetry(Symmetry::Yes)
}

/// 0 on the diagonal, `max{x, y, z}` elsewhere. The space must be nonnegative.
pub fn max_value(space: SpaceDescriptor) -> Result<GMetric> {
    let (lo, _) = space.bounds();
    if lo < 0.0 {
        return Err(Error::InvalidSpace(format!(
            "max-value metric needs a nonnegative space, lowest point is {lo}"
        )));
    }
    Ok(GMetric::new(
        "max-value",
        space,
        |x, y, z| {
            if x == y && y == z {
                0.0
            } else {
                x.max(y).max(z)
            }
        },
    )
    .with_symmetry(Symmetry::Yes))
}

fn positive(name: &'static str, kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::ConstantOutOfRange {
            name,
            value: kappa,
            range: "(0, inf)",
        })
    }
}

/// Monotone transforms keep a symmetric metric symmetric; anything else has
/// to be decided again.
fn inherited(g: &GMetric) -> Symmetry {
    match g.declared_symmetry() {
        Symmetry::Yes => Symmetry::Yes,
        _ => Symmetry::Unknown,
    }
}

/// `kappa * G`.
pub fn scale(g: &GMetric, kappa: f64) -> Result<GMetric> {
    positive("kappa", kappa)?;
    let f = g.raw();
    Ok(GMetric::from_arc(
        format!("scale({}, {kappa})", g.name()),
        g.space().clone(),
        Arc::new(move |x, y, z| kappa * f(x, y, z)),
    )
    .with_symmetry(inherited(g)))
}

/// `min{kappa, G}`.
pub fn truncate_min(g: &GMetric, kappa: f64) -> Result<GMetric> {
    positive("kappa", kappa)?;
    let f = g.raw();
    Ok(GMetric::from_arc(
        format!("truncate({}, {kappa})", g.name()),
        g.space().clone(),
        Arc::new(move |x, y, z| f(x, y, z).min(kappa)),
    )
    .with_symmetry(inherited(g)))
}

/// `G / (1 + G)`, bounded in `[0, 1)`.
pub fn normalize(g: &GMetric) -> GMetric {
    let f = g.raw();
    GMetric::from_arc(
        format!("normalize({})", g.name()),
        g.space().clone(),
        Arc::new(move |x, y, z| {
            let v = f(x, y, z);
            v / (1.0 + v)
        }),
    )
    .with_symmetry(inherited(g))
}

/// A partition of a finite space into labeled blocks, and the shift `kappa`
/// added to triples that straddle blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    pub blocks: Vec<Vec<String>>,
    pub kappa: f64,
}

impl PartitionSpec {
    /// Block index of every point, in space order.
    fn assign(&self, space: &SpaceDescriptor) -> Result<Vec<usize>> {
        positive("kappa", self.kappa)?;
        let points = space.finite_points().ok_or(Error::Unsupported("a partition shift"))?;
        let mut block_of: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {i} is empty")));
            }
            for label in block {
                if block_of.insert(label, i).is_some() {
                    return Err(Error::InvalidPartition(format!("`{label}` is in two blocks")));
                }
            }
        }
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            match block_of.remove(p.label.as_str()) {
                Some(i) => out.push(i),
                None => return Err(Error::InvalidPartition(format!("`{}` is in no block", p.label))),
            }
        }
        if let Some(extra) = block_of.keys().next() {
            return Err(Error::InvalidPartition(format!(
                "`{extra}` is not a point of the space"
            )));
        }
        Ok(out)
    }
}

/// `G` inside a block, `kappa + G` across blocks. The diagonal stays 0.
pub fn partition_shift(g: &GMetric, partition: &PartitionSpec) -> Result<GMetric> {
    let space = g.space().clone();
    let blocks = partition.assign(&space)?;
    let values: Vec<f64> = space.grid();
    let kappa = partition.kappa;
    let f = g.raw();
    let block = move |p: f64| values.iter().position(|&v| v == p).map(|i| blocks[i]);
    Ok(GMetric::from_arc(
        format!("partition({}, {kappa})", g.name()),
        space,
        Arc::new(move |x, y, z| {
            let v = f(x, y, z);
            if x == y && y == z {
                return v;
            }
            let (bx, by, bz) = (block(x), block(y), block(z));
            if bx.is_some() && bx == by && by == bz {
                v
            } else {
                kappa + v
            }
        }),
    )
    .with_symmetry(inherited(g)))
}

/// Non-symmetric metric on a two-point space `{p < q}` built from a metric:
/// `G(p,p,q) = kappa d(p,q)` and `G(p,q,q) = 2 kappa d(p,q)`.
///
/// The construction only pins triples with a repeated point, so it refuses
/// any space other than two points.
pub fn nonsym_from_metric(d: &MetricFn, kappa: f64) -> Result<GMetric> {
    positive("kappa", kappa)?;
    let points = d
        .space
        .finite_points()
        .ok_or(Error::Unsupported("the two-point non-symmetric construction"))?;
    if points.len() != 2 {
        return Err(Error::InvalidSpace(format!(
            "the non-symmetric construction is defined on two points, got {}",
            points.len()
        )));
    }
    let lo = points[0].value.min(points[1].value);
    let dist = d.eval(points[0].value, points[1].value)?;
    Ok(GMetric::new(
        format!("nonsym({}, {kappa})", d.name),
        d.space.clone(),
        move |x, y, z| {
            if x == y && y == z {
                return 0.0;
            }
            let lows = [x, y, z].iter().filter(|&&p| p == lo).count();
            if lows == 2 {
                kappa * dist
            } else {
                2.0 * kappa * dist
            }
        },
    ))
}

/// One explicit entry of a lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub triple: [String; 3],
    pub value: f64,
}

impl TableRow {
    pub fn new(a: &str, b: &str, c: &str, value: f64) -> Self {
        TableRow {
            triple: [a.into(), b.into(), c.into()],
            value,
        }
    }
}

/// Lookup-backed metric on a finite labeled space.
///
/// Every one of the `n^3` ordered triples must be listed; repeated rows must
/// agree. The result is checked against all five axioms exhaustively and
/// rejected with the first violation.
pub fn finite_table(space: SpaceDescriptor, rows: &[TableRow]) -> Result<GMetric> {
    let points = space.finite_points().ok_or(Error::Unsupported("a lookup table"))?;
    let n = points.len();
    let index = |label: &str| {
        points
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::InvalidTableRow(format!("unknown point `{label}`")))
    };
    let mut cells: Vec<Option<f64>> = vec![None; n * n * n];
    for row in rows {
        let [a, b, c] = &row.triple;
        let key = (index(a)? * n + index(b)?) * n + index(c)?;
        match cells[key] {
            Some(prev) if prev != row.value => {
                return Err(Error::InvalidTableRow(format!(
                    "({a},{b},{c}) listed as both {prev} and {}",
                    row.value
                )))
            }
            _ => cells[key] = Some(row.value),
        }
    }
    let missing: Vec<usize> = (0..cells.len()).filter(|&k| cells[k].is_none()).collect();
    if let Some(&first) = missing.first() {
        let label = |i: usize| points[i].label.clone();
        return Err(Error::IncompleteTable {
            missing: missing.len(),
            expected: cells.len(),
            first: [label(first / (n * n)), label(first / n % n), label(first % n)],
        });
    }
    let cells: Vec<f64> = cells.into_iter().flatten().collect();
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let g = GMetric::new("table", space.clone(), move |x, y, z| {
        let at = |p: f64| values.iter().position(|&v| v == p);
        match (at(x), at(y), at(z)) {
            (Some(i), Some(j), Some(k)) => cells[(i * n + j) * n + k],
            _ => f64::NAN,
        }
    });
    let report = check_axioms(&g, &space.triples(), &Tolerance::default())?;
    match report.first_violation() {
        None => Ok(g),
        Some(v) => Err(Error::TableAxiom(v.clone())),
    }
}

/// Rows of the three-point non-symmetric table on `{a, b, c}`.
pub fn three_point_rows() -> Vec<TableRow> {
    let groups: [(f64, &[&str]); 5] = [
        (0.0, &["aaa", "bbb", "ccc"]),
        (1.0, &["abb", "bab", "bba"]),
        (2.0, &["aab", "aba", "baa", "bcc", "cbc", "ccb"]),
        (3.0, &["aac", "aca", "caa", "acc", "cac", "cca"]),
        (4.0, &["bbc", "bcb", "cbb", "abc", "acb", "bac", "bca", "cab", "cba"]),
    ];
    groups
        .iter()
        .flat_map(|(value, triples)| {
            triples.iter().map(move |t| {
                let l: Vec<String> = t.chars().map(String::from).collect();
                TableRow::new(&l[0], &l[1], &l[2], *value)
            })
        })
        .collect()
}

/// The three-point non-symmetric table metric.
pub fn three_point_table() -> Result<GMetric> {
    finite_table(SpaceDescriptor::labeled(&["a", "b", "c"])?, &three_point_rows())
}
