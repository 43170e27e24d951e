//! Scenario files: a space, a G-metric, up to four maps and run settings.
//!
//! ```toml
//! name = "halving"
//!
//! [space]
//! kind = "interval"
//! lo = 0.0
//! hi = 1.0
//!
//! [metric]
//! kind = "max"
//! base = "absolute"
//!
//! [maps]
//! S = { kind = "divide", divisor = 2.0 }
//! T = { kind = "alias", of = "S" }
//!
//! [run]
//! constant = "1/2"
//! x0 = 1.0
//! ```
//!
//! Roles `A` and `B` default to the identity when omitted.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constructors::{self, MetricFn, PartitionSpec, TableRow};
use crate::contraction::ContractionForm;
use crate::error::{Error, Result};
use crate::gmetric::GMetric;
use crate::maps::{MapSystem, SelfMap};
use crate::space::{SamplingPlan, SpaceDescriptor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Documented expected outcome, echoed into reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub space: SpaceSpec,
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Finite {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
    Interval {
        lo: f64,
        hi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plan: Option<SamplingPlan>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMetric {
    Absolute,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Sum {
        #[serde(default = "absolute")]
        base: BaseMetric,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    Max {
        #[serde(default = "absolute")]
        base: BaseMetric,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    Discrete {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    MaxValue {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    Nonsym {
        #[serde(default = "absolute")]
        base: BaseMetric,
        kappa: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    /// A full table of values; `rows` may be omitted for the built-in
    /// three-point table when the space is `a, b, c`.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        builtin: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rows: Vec<RowSpec>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
}

fn absolute() -> BaseMetric {
    BaseMetric::Absolute
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub at: [String; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Transform {
    Scale { kappa: f64 },
    TruncateMin { kappa: f64 },
    Normalize,
    PartitionShift { blocks: Vec<Vec<String>>, kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Constant {
        value: Point,
    },
    Affine {
        slope: f64,
        intercept: f64,
    },
    Divide {
        divisor: f64,
    },
    /// Finite spaces only: image label for every point label.
    Table {
        image: BTreeMap<String, String>,
    },
    Builtin {
        name: String,
    },
    /// Shares the map of another role.
    Alias {
        of: String,
    },
}

/// A point given by value or, on finite spaces, by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Value(f64),
    Label(String),
}

impl Point {
    pub fn resolve(&self, space: &SpaceDescriptor) -> Result<f64> {
        match self {
            Point::Value(v) => Ok(*v),
            Point::Label(l) => space
                .point(l)
                .ok_or_else(|| Error::InvalidSpace(format!("unknown point `{l}`"))),
        }
    }
}

/// A constant given as a number or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Value(f64),
    Text(String),
}

impl Constant {
    pub fn value(&self) -> Result<f64> {
        match self {
            Constant::Value(v) => Ok(*v),
            Constant::Text(t) => parse_constant(t),
        }
    }
}

/// Parses `"0.5"`, `"1/3"`.
pub fn parse_constant(text: &str) -> Result<f64> {
    let bad = || Error::InvalidSpace(format!("not a constant: `{text}`"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let v = match text.split_once('/') {
        Some((p, q)) => parse(p)? / parse(q)?,
        None => parse(text)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "max_form")]
    pub form: ContractionForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Constant>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<Point>,
    #[serde(default)]
    pub strict: bool,
    /// Allows constants outside the hypothesis ranges in `check`.
    #[serde(default)]
    pub exploratory: bool,
    /// Subset of check names to run; all when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
}

fn max_form() -> ContractionForm {
    ContractionForm::Max
}

fn default_tol() -> f64 {
    1e-9
}

fn default_n_max() -> usize {
    10_000
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            form: max_form(),
            constant: None,
            tol: default_tol(),
            seed: None,
            n_max: default_n_max(),
            x0: None,
            starts: Vec::new(),
            strict: false,
            exploratory: false,
            checks: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn build_space(&self, seed: u64) -> Result<SpaceDescriptor> {
        let space = match &self.space {
            SpaceSpec::Finite {
                labels: Some(l),
                values: None,
            } => SpaceDescriptor::labeled(l)?,
            SpaceSpec::Finite {
                labels: None,
                values: Some(v),
            } => SpaceDescriptor::from_values(v)?,
            SpaceSpec::Finite { .. } => {
                return Err(Error::InvalidSpace("give exactly one of `labels` or `values`".into()))
            }
            SpaceSpec::Interval { lo, hi, plan } => {
                SpaceDescriptor::interval(*lo, *hi)?.with_plan(plan.clone().unwrap_or_default())
            }
        };
        Ok(space.with_seed(seed))
    }

    pub fn build_metric(&self, space: &SpaceDescriptor) -> Result<GMetric> {
        let base = |b: BaseMetric| match b {
            BaseMetric::Absolute => MetricFn::absolute(space.clone()),
            BaseMetric::Discrete => MetricFn::discrete(space.clone()),
        };
        let (g, transforms) = match &self.metric {
            MetricSpec::Sum { base: b, transforms } => (constructors::from_metric_sum(&base(*b)?), transforms),
            MetricSpec::Max { base: b, transforms } => (constructors::from_metric_max(&base(*b)?), transforms),
            MetricSpec::Discrete { transforms } => (constructors::discrete(space.clone()), transforms),
            MetricSpec::MaxValue { transforms } => (constructors::max_value(space.clone())?, transforms),
            MetricSpec::Nonsym {
                base: b,
                kappa,
                transforms,
            } => (constructors::nonsym_from_metric(&base(*b)?, *kappa)?, transforms),
            MetricSpec::Table {
                builtin,
                rows,
                transforms,
            } => {
                let rows = self.table_rows(builtin.as_deref(), rows)?;
                (constructors::finite_table(space.clone(), &rows)?, transforms)
            }
        };
        transforms.iter().try_fold(g, |g, t| match t {
            Transform::Scale { kappa } => constructors::scale(&g, *kappa),
            Transform::TruncateMin { kappa } => constructors::truncate_min(&g, *kappa),
            Transform::Normalize => Ok(constructors::normalize(&g)),
            Transform::PartitionShift { blocks, kappa } => constructors::partition_shift(
                &g,
                &PartitionSpec {
                    blocks: blocks.clone(),
                    kappa: *kappa,
                },
            ),
        })
    }

    fn table_rows(&self, builtin: Option<&str>, rows: &[RowSpec]) -> Result<Vec<TableRow>> {
        match (builtin, rows.is_empty()) {
            (Some("three-point"), true) => Ok(constructors::three_point_rows()),
            (Some(other), true) => Err(Error::InvalidSpace(format!("unknown built-in table `{other}`"))),
            (None, _) => Ok(rows
                .iter()
                .map(|r| TableRow::new(&r.at[0], &r.at[1], &r.at[2], r.value))
                .collect()),
            (Some(_), false) => Err(Error::InvalidSpace("give either `builtin` or `rows`".into())),
        }
    }

    pub fn has_maps(&self) -> bool {
        !self.maps.is_empty()
    }

    /// Builds the four roles; aliases share one map.
    pub fn build_maps(&self, space: &SpaceDescriptor) -> Result<MapSystem> {
        for role in self.maps.keys() {
            if !ROLES.contains(&role.as_str()) {
                return Err(Error::InvalidSpace(format!("unknown map role `{role}`")));
            }
        }
        let mut built: BTreeMap<&str, Arc<SelfMap>> = BTreeMap::new();
        for role in ROLES {
            self.resolve_role(role, space, &mut built, 0)?;
        }
        MapSystem::new(
            Arc::clone(&built["A"]),
            Arc::clone(&built["B"]),
            Arc::clone(&built["S"]),
            Arc::clone(&built["T"]),
        )
    }

    fn resolve_role(
        &self,
        role: &'static str,
        space: &SpaceDescriptor,
        built: &mut BTreeMap<&'static str, Arc<SelfMap>>,
        depth: usize,
    ) -> Result<Arc<SelfMap>> {
        if let Some(m) = built.get(role) {
            return Ok(Arc::clone(m));
        }
        if depth > ROLES.len() {
            return Err(Error::InvalidSpace(format!("alias cycle through `{role}`")));
        }
        let spec = self.maps.get(role).cloned().unwrap_or(MapSpec::Identity);
        let map = match spec {
            MapSpec::Alias { of } => {
                let target = ROLES
                    .iter()
                    .copied()
                    .find(|r| *r == of)
                    .ok_or_else(|| Error::InvalidSpace(format!("alias of unknown role `{of}`")))?;
                self.resolve_role(target, space, built, depth + 1)?
            }
            other => Arc::new(build_map(&other, space)?.relabel(format!("{role}: {}", describe(&other)))),
        };
        built.insert(role, Arc::clone(&map));
        Ok(map)
    }

    /// Start point for `solve`: `run.x0`, else the first point of the space.
    pub fn x0(&self, space: &SpaceDescriptor) -> Result<f64> {
        match &self.run.x0 {
            Some(p) => p.resolve(space),
            None => Ok(space.grid()[0]),
        }
    }
}

/// Role names in a fixed order.
pub const ROLES: [&str; 4] = ["A", "B", "S", "T"];

fn describe(spec: &MapSpec) -> String {
    match spec {
        MapSpec::Identity => "identity".into(),
        MapSpec::Constant { value } => format!("constant {}", point_text(value)),
        MapSpec::Affine { slope, intercept } => format!("{slope}x + {intercept}"),
        MapSpec::Divide { divisor } => format!("x/{divisor}"),
        MapSpec::Table { .. } => "table".into(),
        MapSpec::Builtin { name } => name.clone(),
        MapSpec::Alias { of } => format!("alias of {of}"),
    }
}

fn point_text(p: &Point) -> String {
    match p {
        Point::Value(v) => v.to_string(),
        Point::Label(l) => l.clone(),
    }
}

fn build_map(spec: &MapSpec, space: &SpaceDescriptor) -> Result<SelfMap> {
    Ok(match spec {
        MapSpec::Identity => SelfMap::identity(space.clone()),
        MapSpec::Constant { value } => SelfMap::constant(space.clone(), value.resolve(space)?),
        MapSpec::Affine { slope, intercept } => SelfMap::affine(space.clone(), *slope, *intercept),
        MapSpec::Divide { divisor } => {
            if *divisor == 0.0 || !divisor.is_finite() {
                return Err(Error::InvalidSpace(format!("bad divisor {divisor}")));
            }
            SelfMap::divide(space.clone(), *divisor)
        }
        MapSpec::Table { image } => {
            let pairs: Vec<(&str, &str)> = image.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            SelfMap::table(space.clone(), &pairs)?
        }
        MapSpec::Builtin { name } => builtin_map(name, space)?,
        MapSpec::Alias { .. } => unreachable!("aliases are resolved by role"),
    })
}

/// Named maps: `example-2.6:A` .. `example-2.6:T` are `x/3, x/6, x/9, x/12`.
pub fn builtin_map(name: &str, space: &SpaceDescriptor) -> Result<SelfMap> {
    let divisor = match name {
        "example-2.6:A" => 3.0,
        "example-2.6:B" => 6.0,
        "example-2.6:S" => 9.0,
        "example-2.6:T" => 12.0,
        other => return Err(Error::InvalidSpace(format!("unknown built-in map `{other}`"))),
    };
    Ok(SelfMap::divide(space.clone(), divisor))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALVING: &str = r#"
name = "halving"

[space]
kind = "interval"
lo = 0.0
hi = 1.0

[metric]
kind = "max"

[maps]
S = { kind = "divide", divisor = 2.0 }
T = { kind = "alias", of = "S" }

[run]
constant = "1/2"
x0 = 1.0
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ScenarioConfig::from_toml(HALVING).unwrap();
        assert_eq!(cfg.run.constant.as_ref().unwrap().value().unwrap(), 0.5);
        let space = cfg.build_space(0).unwrap();
        let g = cfg.build_metric(&space).unwrap();
        assert_eq!(g.eval(0.0, 0.5, 1.0).unwrap(), 1.0);
        let sys = cfg.build_maps(&space).unwrap();
        assert_eq!(sys.aliases(), vec![("S", "T")]);
        assert_eq!(sys.a.apply(0.3), 0.3);
        assert_eq!(cfg.x0(&space).unwrap(), 1.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ScenarioConfig::from_toml(HALVING).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = HALVING.replace("x0 = 1.0", "x_0 = 1.0");
        let err = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert!(err.span().is_some());
    }

    #[test]
    fn constants() {
        assert_eq!(parse_constant("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_constant(" 0.25 ").unwrap(), 0.25);
        assert!(parse_constant("1/0").is_err());
        assert!(parse_constant("half").is_err());
    }

    #[test]
    fn alias_cycles_fail() {
        let cyc = HALVING.replace(
            r#"S = { kind = "divide", divisor = 2.0 }"#,
            r#"S = { kind = "alias", of = "T" }"#,
        );
        let cfg = ScenarioConfig::from_toml(&cyc).unwrap();
        let space = cfg.build_space(0).unwrap();
        assert!(cfg.build_maps(&space).is_err());
    }

    #[test]
    fn finite_tables_and_labels() {
        let text = r#"
name = "flip"
[space]
kind = "finite"
labels = ["a", "b"]
[metric]
kind = "discrete"
[maps]
S = { kind = "table", image = { a = "b", b = "a" } }
T = { kind = "constant", value = "a" }
[run]
x0 = "b"
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        let space = cfg.build_space(0).unwrap();
        let sys = cfg.build_maps(&space).unwrap();
        assert_eq!(sys.s.apply(0.0), 1.0);
        assert_eq!(sys.t.apply(1.0), 0.0);
        assert_eq!(cfg.x0(&space).unwrap(), 1.0);
    }
}
