//! Outcome of a sampled check: how many instances were tested and every
//! instance that failed, with enough data to replay it.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// One failed instance of a rule.
///
/// `lhs` and `rhs` are the two sides of the relation that did not hold,
/// evaluated at `witness`. Re-evaluating the rule at the witness reproduces
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub witness: Vec<f64>,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
}

impl Violation {
    pub fn new(rule: impl Into<String>, witness: &[f64], lhs: f64, rhs: f64) -> Self {
        Violation {
            rule: rule.into(),
            witness: witness.to_vec(),
            lhs,
            rhs,
        }
    }

    /// How far the relation missed, `lhs - rhs`.
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }

    fn order(&self, other: &Self) -> Ordering {
        let by_witness = self
            .witness
            .iter()
            .zip(&other.witness)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.witness.len().cmp(&other.witness.len()));
        by_witness.then_with(|| self.rule.cmp(&other.rule))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {:?}: lhs {} vs rhs {}",
            self.rule, self.witness, self.lhs, self.rhs
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
    /// Set when the check could not reach a verdict (e.g. a range inclusion on
    /// an interval with no way to solve for preimages). Distinct from failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<String>,
}

impl CheckReport {
    pub fn new() -> Self {
        CheckReport {
            passed: true,
            ..Default::default()
        }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        CheckReport {
            passed: true,
            inconclusive: Some(reason.into()),
            ..Default::default()
        }
    }

    pub(crate) fn tested(&mut self) {
        self.checked += 1;
    }

    pub(crate) fn violate(&mut self, v: Violation) {
        self.violations.push(v);
    }

    /// Records one tested instance of `lhs <= rhs + tol`.
    pub(crate) fn expect_le(&mut self, rule: &str, witness: &[f64], lhs: f64, rhs: f64, tol: f64) {
        self.tested();
        if lhs > rhs + tol {
            self.violate(Violation::new(rule, witness, lhs, rhs));
        }
    }

    /// Sorts violations by witness and settles `passed`.
    pub fn finish(mut self) -> Self {
        self.violations.sort_by(Violation::order);
        self.passed = self.violations.is_empty();
        self
    }

    /// Combines reports; the result is independent of the order of `parts`.
    pub fn merge(parts: impl IntoIterator<Item = CheckReport>) -> Self {
        let mut out = CheckReport::new();
        for part in parts {
            out.checked += part.checked;
            out.violations.extend(part.violations);
            if out.inconclusive.is_none() {
                out.inconclusive = part.inconclusive;
            }
        }
        out.finish()
    }

    pub fn is_conclusive(&self) -> bool {
        self.inconclusive.is_none()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn violations_of<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.rule == rule)
    }

    /// The violation that misses by the largest margin.
    pub fn worst(&self) -> Option<&Violation> {
        worst(&self.violations)
    }
}

/// Largest excess; near-ties (relative `1e-12`) go to the earliest entry.
pub fn worst<'a>(violations: impl IntoIterator<Item = &'a Violation> + Clone) -> Option<&'a Violation> {
    let top = violations
        .clone()
        .into_iter()
        .map(Violation::excess)
        .filter(|e| !e.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = if top.is_finite() {
        1e-12 * top.abs().max(1.0)
    } else {
        0.0
    };
    violations.into_iter().find(|v| v.excess() >= top - slack)
}

/// Serde helper writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`; plain JSON has no representation for them.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_tracks_violations() {
        let mut r = CheckReport::new();
        r.expect_le("le", &[1.0], 1.0, 1.0, 0.0);
        assert!(r.clone().finish().passed);
        r.expect_le("le", &[2.0], 2.0, 1.0, 0.5);
        let r = r.finish();
        assert!(!r.passed);
        assert_eq!(r.checked, 2);
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = CheckReport::new();
        a.expect_le("x", &[0.5, 0.1], 2.0, 1.0, 0.0);
        let mut b = CheckReport::new();
        b.expect_le("x", &[0.1, 0.9], 3.0, 1.0, 0.0);
        b.expect_le("y", &[0.1, 0.9], 3.0, 1.0, 0.0);
        let ab = CheckReport::merge([a.clone(), b.clone()]);
        let ba = CheckReport::merge([b, a]);
        assert_eq!(ab, ba);
        assert_eq!(ab.violations[0].witness, vec![0.1, 0.9]);
        assert_eq!(ab.violations[2].witness, vec![0.5, 0.1]);
    }

    #[test]
    fn worst_prefers_earliest_near_tie() {
        let vs = vec![
            Violation::new("r", &[0.0], 1.0 / 12.0, 1.0 / 18.0),
            Violation::new("r", &[0.5], 0.1, 0.0),
            Violation::new("r", &[1.0], 0.1 + 1e-17, 0.0),
        ];
        assert_eq!(worst(&vs).unwrap().witness, vec![0.5]);
        assert!(worst(&[]).is_none());
    }

    #[test]
    fn infinite_sides_round_trip() {
        let v = Violation::new("r", &[1.0], f64::INFINITY, 0.0);
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<Violation>(&json).unwrap(), v);
    }
}
