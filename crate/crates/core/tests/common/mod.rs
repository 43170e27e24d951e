#![allow(dead_code)]

use gfix::constructors::{self, MetricFn, PartitionSpec};
use gfix::gmetric::GMetric;
use gfix::maps::{MapSystem, SelfMap};
use gfix::space::SpaceDescriptor;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unit() -> SpaceDescriptor {
    SpaceDescriptor::interval(0.0, 1.0).unwrap()
}

pub fn abc() -> SpaceDescriptor {
    SpaceDescriptor::labeled(&["a", "b", "c"]).unwrap()
}

/// One output of every constructor, on interval and finite spaces.
pub fn constructor_corpus() -> Vec<GMetric> {
    let line = MetricFn::absolute(unit()).unwrap();
    let finite_line = MetricFn::absolute(SpaceDescriptor::from_values(&[0.0, 0.5, 2.0, 3.5]).unwrap()).unwrap();
    let disc_base = MetricFn::discrete(abc()).unwrap();
    let four = SpaceDescriptor::labeled(&["p", "q", "r", "s"]).unwrap();
    let table = constructors::three_point_table().unwrap();
    let sum = constructors::from_metric_sum(&line);
    let max = constructors::from_metric_max(&line);
    let partition = PartitionSpec {
        blocks: vec![vec!["p".into(), "q".into()], vec!["r".into(), "s".into()]],
        kappa: 0.5,
    };
    vec![
        sum.clone(),
        max.clone(),
        constructors::from_metric_sum(&finite_line),
        constructors::from_metric_max(&disc_base),
        constructors::discrete(abc()),
        constructors::discrete(unit()),
        constructors::max_value(unit()).unwrap(),
        constructors::scale(&sum, 2.5).unwrap(),
        constructors::scale(&table, 0.5).unwrap(),
        constructors::truncate_min(&max, 0.3).unwrap(),
        constructors::truncate_min(&table, 1.5).unwrap(),
        constructors::normalize(&sum),
        constructors::normalize(&table),
        constructors::partition_shift(&constructors::discrete(four.clone()), &partition).unwrap(),
        constructors::partition_shift(
            &constructors::from_metric_max(&MetricFn::absolute(four).unwrap()),
            &partition,
        )
        .unwrap(),
        constructors::nonsym_from_metric(
            &MetricFn::absolute(SpaceDescriptor::from_values(&[0.0, 1.0]).unwrap()).unwrap(),
            1.0,
        )
        .unwrap(),
        constructors::nonsym_from_metric(
            &MetricFn::discrete(SpaceDescriptor::labeled(&["u", "v"]).unwrap()).unwrap(),
            0.25,
        )
        .unwrap(),
        table,
    ]
}

/// A seeded finite scenario: G-metric and four table maps.
pub struct FiniteScenario {
    pub g: GMetric,
    pub sys: MapSystem,
    pub x0: f64,
    pub description: String,
}

fn random_metric(rng: &mut ChaCha8Rng, space: &SpaceDescriptor) -> GMetric {
    match rng.random_range(0..5) {
        0 => constructors::discrete(space.clone()),
        1 if space == &abc() => constructors::three_point_table().unwrap(),
        2 => constructors::normalize(&constructors::from_metric_sum(
            &MetricFn::absolute(space.clone()).unwrap(),
        )),
        3 => constructors::scale(
            &constructors::from_metric_sum(&MetricFn::absolute(space.clone()).unwrap()),
            0.5,
        )
        .unwrap(),
        _ => constructors::from_metric_max(&MetricFn::absolute(space.clone()).unwrap()),
    }
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::new();
    while v.len() < n {
        let x = rng.random_range(0..40) as f64 / 4.0;
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

fn table_map(space: &SpaceDescriptor, image: Vec<f64>) -> SelfMap {
    SelfMap::lookup("table", space.clone(), space.grid(), image)
}

/// Maps biased toward the hypotheses: all four fix a common point `z`, and
/// `S`, `T` collapse most of the space onto `z`.
pub fn biased_scenario(seed: u64) -> FiniteScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=6);
    let space = if n == 3 && rng.random_bool(0.5) {
        abc()
    } else {
        SpaceDescriptor::from_values(&random_values(&mut rng, n)).unwrap()
    };
    let pts = space.grid();
    let z = *pts.choose(&mut rng).unwrap();
    let perm_fixing_z = |rng: &mut ChaCha8Rng| {
        let mut rest: Vec<f64> = pts.iter().copied().filter(|&p| p != z).collect();
        rest.sort_by(f64::total_cmp);
        let mut shuffled = rest.clone();
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], rng);
        pts.iter()
            .map(|&p| {
                if p == z {
                    z
                } else {
                    shuffled[rest.iter().position(|&r| r == p).unwrap()]
                }
            })
            .collect::<Vec<f64>>()
    };
    let collapse = |rng: &mut ChaCha8Rng, a: &[f64]| {
        // Mostly z; occasionally a point with the same A-image class.
        pts.iter()
            .zip(a)
            .map(|(&p, &ap)| if p == z || rng.random_bool(0.8) { z } else { ap })
            .collect::<Vec<f64>>()
    };
    let a_img = perm_fixing_z(&mut rng);
    let b_img = if rng.random_bool(0.5) {
        a_img.clone()
    } else {
        perm_fixing_z(&mut rng)
    };
    let s_img = collapse(&mut rng, &a_img);
    let t_img = if rng.random_bool(0.5) {
        s_img.clone()
    } else {
        collapse(&mut rng, &b_img)
    };
    let g = random_metric(&mut rng, &space);
    let sys = MapSystem::from_maps(
        table_map(&space, a_img),
        table_map(&space, b_img),
        table_map(&space, s_img),
        table_map(&space, t_img),
    )
    .unwrap();
    FiniteScenario {
        description: format!("biased seed {seed}, {n} points, {}", g.name()),
        x0: *pts.choose(&mut rng).unwrap(),
        g,
        sys,
    }
}

/// Four uniformly random table maps.
pub fn random_scenario(seed: u64) -> FiniteScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5);
    let space = SpaceDescriptor::from_values(&random_values(&mut rng, n)).unwrap();
    let pts = space.grid();
    let img = |rng: &mut ChaCha8Rng| (0..n).map(|_| *pts.choose(rng).unwrap()).collect::<Vec<f64>>();
    let maps: Vec<Vec<f64>> = (0..4).map(|_| img(&mut rng)).collect();
    let g = random_metric(&mut rng, &space);
    let sys = MapSystem::from_maps(
        table_map(&space, maps[0].clone()),
        table_map(&space, maps[1].clone()),
        table_map(&space, maps[2].clone()),
        table_map(&space, maps[3].clone()),
    )
    .unwrap();
    FiniteScenario {
        description: format!("random seed {seed}, {n} points, {}", g.name()),
        x0: *pts.choose(&mut rng).unwrap(),
        g,
        sys,
    }
}

/// Identity-fixed-point scenario where every point is a common fixed point.
pub fn all_identity(space: SpaceDescriptor) -> MapSystem {
    MapSystem::single(SelfMap::identity(space)).unwrap()
}
