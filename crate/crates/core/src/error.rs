use thiserror::Error;

use crate::report::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A G-metric (or base metric) produced a negative, NaN or infinite value.
    #[error("metric `{metric}` returned {value} at {args:?}")]
    InvalidValue { metric: String, args: Vec<f64>, value: f64 },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid base metric `{name}`: {violation}")]
    InvalidMetric { name: String, violation: Violation },

    #[error("constant {name} = {value} outside its admissible range {range}")]
    ConstantOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("incomplete table: {missing} of {expected} triples missing, first is {first:?}")]
    IncompleteTable {
        missing: usize,
        expected: usize,
        first: [String; 3],
    },

    #[error("invalid table row: {0}")]
    InvalidTableRow(String),

    #[error("table is not a G-metric: {0}")]
    TableAxiom(Violation),

    #[error("map `{map}` sends {x} to {image}, outside the space")]
    NotSelfMap { map: String, x: f64, image: f64 },

    #[error("maps of one system live on different spaces ({0})")]
    SpaceMismatch(String),

    #[error("no preimage of {target} under `{map}`")]
    NoPreimage { map: String, target: f64 },

    /// Bisection needs a monotone map; anything else must bring its own oracle.
    #[error("map `{0}` is not monotone on the probe grid and has no preimage oracle")]
    NotMonotone(String),

    #[error("{0} requires a finite space")]
    Unsupported(&'static str),

    #[error("estimate inconclusive: every sampled ratio was 0/0")]
    InconclusiveEstimate,

    #[error("hypothesis checks failed in strict mode: {0:?}")]
    HypothesisFailed(Vec<String>),
}
