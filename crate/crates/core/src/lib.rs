//! G-metric spaces, checkers for the hypotheses of four-map common fixed
//! point results, and a solver that runs the coupled iteration and
//! certifies its limit.
//!
//! Every check is sampled: exhaustive on finite spaces, a seeded grid plus
//! random draws on intervals. Results are [`report::CheckReport`]s carrying
//! the number of instances tested and a replayable witness for each failure.
//!
//! ```
//! use gfix::constructors::{from_metric_max, MetricFn};
//! use gfix::maps::{MapSystem, SelfMap};
//! use gfix::solver::{find_common_fixed_point, SolveOptions};
//! use gfix::space::SpaceDescriptor;
//!
//! let unit = SpaceDescriptor::interval(0.0, 1.0).unwrap();
//! let g = from_metric_max(&MetricFn::absolute(unit.clone()).unwrap());
//! let d = |k| SelfMap::divide(unit.clone(), k);
//! let sys = MapSystem::from_maps(d(3.0), d(6.0), d(9.0), d(12.0)).unwrap();
//! let opts = SolveOptions { constant: Some(0.7), ..SolveOptions::default() };
//! let sol = find_common_fixed_point(&g, &sys, 1.0, &opts).unwrap();
//! assert!(sol.accepted());
//! assert!(sol.certificate.unwrap().z.abs() < 1e-9);
//! ```
//!
//! The `gfix` binary wraps the [`cli`] module; the guide in `book/` walks
//! through each module and is compiled as part of the doc-tests.

pub mod cli;
pub mod constructors;
pub mod contraction;
pub mod error;
pub mod gmetric;
pub mod maps;
pub mod report;
pub mod solver;
pub mod space;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/g-metrics.md")]
    pub mod g_metrics {}
    #[doc = include_str!("../../../book/src/constructors.md")]
    pub mod constructors {}
    #[doc = include_str!("../../../book/src/maps.md")]
    pub mod maps {}
    #[doc = include_str!("../../../book/src/contraction.md")]
    pub mod contraction {}
    #[doc = include_str!("../../../book/src/solver.md")]
    pub mod solver {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
