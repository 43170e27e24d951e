//! Acceptance criteria, one line each.
//!
//! Run with `cargo test --test acceptance`. Criteria listed in
//! `EXPECTED_FAILURES` are known to be unattainable as stated; they are still
//! evaluated and printed as FAIL, and the run fails if one of them starts to
//! pass (so the list cannot go stale) or if any other criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use gfix::cli::{self, Command, Overrides, RunReport};
use gfix::constructors::{self, MetricFn};
use gfix::contraction::{check_condition_sum, ContractionForm};
use gfix::gmetric::{check_axioms, check_basic_properties, check_dg_bounds, GMetric};
use gfix::maps::{MapSystem, SelfMap};
use gfix::solver::{
    brute_force_fixed_points, build_sequence, check_hypotheses, check_rate, find_common_fixed_point, RateConstant,
    SolveOptions, Uniqueness,
};
use gfix::space::Tolerance;

/// Criteria that cannot hold as written; each has a recorded analysis.
///
/// 5: the minimal max-form constant of the four linear maps is 2/3, attained
/// along y = 4x (e.g. (0.01, 0.04)), so h = 0.5 fails and the estimate is
/// outside [0.45, 0.55].
const EXPECTED_FAILURES: [u32; 1] = [5];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(what.into());
        }
    }
}

fn solve(name: &str, seed: Option<u64>) -> RunReport {
    let o = Overrides {
        seed,
        ..Overrides::default()
    };
    cli::run(Command::Solve, name, &o).expect("scenario runs")
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    let report = solve("example-2.6", None);
    let elapsed = started.elapsed();
    let sol = report.solution.as_ref().expect("solution");
    let cert = sol.certificate.as_ref().expect("certificate");
    out.require(sol.x0 == 1.0, "start is x0 = 1");
    out.require(cert.z.abs() <= 1e-9, format!("z = {} not within 1e-9 of 0", cert.z));
    let r = &cert.residuals;
    for (role, v) in [("A", r.a), ("B", r.b), ("S", r.s), ("T", r.t)] {
        out.require(v <= 1e-9, format!("residual {role} = {v}"));
    }
    out.require(cert.accepted, "certificate not accepted");
    out.require(
        sol.trace.iterations <= 100,
        format!("{} iterations", sol.trace.iterations),
    );
    out.require(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"));
    let limits: Vec<f64> = sol.starts.iter().filter_map(|s| s.limit).collect();
    out.require(limits.len() == 4, "not every start converged");
    for a in &limits {
        for b in &limits {
            out.require((a - b).abs() <= 1e-8, format!("starts disagree: {a} vs {b}"));
        }
    }
    out.require(
        matches!(cert.uniqueness, Uniqueness::UniqueOnSample { .. }),
        format!("uniqueness {:?}", cert.uniqueness),
    );
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let report = solve("example-2.6", None);
    let trace = &report.solution.as_ref().unwrap().trace;
    let g = constructors::from_metric_max(&MetricFn::absolute(common::unit()).unwrap());
    let rate = check_rate(&g, trace, RateConstant::Max(0.5), 1e-12).unwrap();
    out.require(rate.passed, format!("rate bound: {:?}", rate.first_violation()));
    out.require(rate.checked > trace.step_g.len(), "tail bound not sampled");
    out.require(
        (trace.y_seq[0] - 1.0 / 12.0).abs() < 1e-15,
        format!("y0 = {}", trace.y_seq[0]),
    );
    out.require(
        (trace.y_seq[1] - 1.0 / 36.0).abs() < 1e-15,
        format!("y1 = {}", trace.y_seq[1]),
    );
    out
}

fn metric_suite(out: &mut Outcome, check: impl Fn(&GMetric) -> (usize, usize, bool)) {
    for g in common::constructor_corpus() {
        let (checked, violations, exhaustive) = check(&g);
        out.require(violations == 0, format!("{}: {violations} violations", g.name()));
        out.require(
            exhaustive || checked >= 10_000,
            format!("{}: only {checked} sampled instances", g.name()),
        );
    }
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let tol = Tolerance::default();
    metric_suite(&mut out, |g| {
        let triples = g.space().triples();
        let r = check_axioms(g, &triples, &tol).unwrap();
        (r.checked, r.violations.len(), triples.exhaustive)
    });
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let tol = Tolerance::default();
    metric_suite(&mut out, |g| {
        let tuples = g.space().tuples::<5>();
        let props = check_basic_properties(g, &tuples, &tol).unwrap();
        let pairs = g.space().pairs();
        let dg = check_dg_bounds(g, &pairs, &tol).unwrap();
        (
            props.checked.min(dg.checked),
            props.violations.len() + dg.violations.len(),
            tuples.exhaustive && pairs.exhaustive,
        )
    });
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let third = Overrides {
        constant: Some("1/3".into()),
        ..Overrides::default()
    };
    let r = cli::run(Command::Check, "example-2.6", &third).unwrap();
    let c = r.check("contraction").unwrap();
    out.require(r.exit_code == 1, format!("h = 1/3 exit code {}", r.exit_code));
    let worst = c.worst.iter().find(|v| v.rule == "max-first");
    out.require(
        worst.is_some_and(|v| {
            v.witness == [0.0, 1.0] && (v.lhs - 1.0 / 12.0).abs() < 1e-12 && (v.rhs - 1.0 / 18.0).abs() < 1e-12
        }),
        format!("h = 1/3 first-inequality witness {worst:?}"),
    );
    let half = cli::run(Command::Check, "example-2.6", &Overrides::default()).unwrap();
    let c = half.check("contraction").unwrap();
    out.require(
        c.passed,
        format!(
            "h = 0.5 fails with {} violations, worst {:?}",
            c.violation_count,
            c.worst.first().map(|v| (&v.witness, v.lhs, v.rhs))
        ),
    );
    let est = half.check("min-constant").and_then(|m| m.estimate.clone()).unwrap();
    out.require(
        (0.45..=0.55).contains(&est.value),
        format!("estimate {} at {:?}", est.value, est.witness),
    );
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let opts = SolveOptions::default();
    let mut certified = 0;
    let mut multi = 0;
    for seed in 0..400u64 {
        for sc in [common::biased_scenario(seed), common::random_scenario(10_000 + seed)] {
            let brute = brute_force_fixed_points(&sc.sys).unwrap();
            let tol = Tolerance::uniform(opts.tol);
            let hyp = check_hypotheses(&sc.g, &sc.sys, &opts, &tol).unwrap();
            if brute.len() >= 2 {
                multi += 1;
                out.require(
                    !hyp.all_passed(),
                    format!("{}: {} fixed points, all hypotheses pass", sc.description, brute.len()),
                );
            }
            if !hyp.all_passed() {
                continue;
            }
            let sol = find_common_fixed_point(&sc.g, &sc.sys, sc.x0, &opts).unwrap();
            let z = sol.certificate.as_ref().map(|c| c.z);
            out.require(
                brute.len() == 1 && z == Some(brute[0]),
                format!("{}: solver {z:?}, brute force {brute:?}", sc.description),
            );
            certified += 1;
        }
    }
    out.require(
        certified >= 20,
        format!("only {certified} scenarios passed the hypotheses"),
    );
    out.require(multi > 0, "no scenario with several fixed points was generated");
    out.notes
        .push(format!("{certified} certified, {multi} with several fixed points"));
    out
}

/// Runs an aliased system through the solver and checks the criterion 1-2
/// analogues: convergence to `z`, residuals, iteration count, start
/// agreement, and the rate bound at the constant the hypothesis check used.
fn corollary(
    out: &mut Outcome,
    label: &str,
    sys: &MapSystem,
    form: ContractionForm,
    constant: Option<f64>,
    z: f64,
    first_ys: [f64; 2],
) {
    let g = constructors::from_metric_max(&MetricFn::absolute(common::unit()).unwrap());
    let opts = SolveOptions {
        form,
        constant,
        starts: vec![0.0, 0.25, 0.5, 1.0],
        ..SolveOptions::default()
    };
    let sol = find_common_fixed_point(&g, sys, 1.0, &opts).unwrap();
    out.require(
        sol.hypotheses.all_passed(),
        format!("{label}: failed {:?}", sol.hypotheses.failed()),
    );
    let Some(cert) = sol.certificate.as_ref() else {
        out.require(false, format!("{label}: no certificate"));
        return;
    };
    out.require((cert.z - z).abs() <= 1e-9, format!("{label}: z = {}", cert.z));
    out.require(
        cert.accepted && cert.residuals.max() <= 1e-9,
        format!("{label}: residuals {:?}", cert.residuals),
    );
    out.require(
        sol.trace.iterations <= 100,
        format!("{label}: {} iterations", sol.trace.iterations),
    );
    out.require(
        matches!(cert.uniqueness, Uniqueness::UniqueOnSample { .. }),
        format!("{label}: {:?}", cert.uniqueness),
    );
    let rc = RateConstant::new(form, sol.hypotheses.contraction.constant);
    let rate = check_rate(&g, &sol.trace, rc, 1e-12).unwrap();
    out.require(
        rate.passed,
        format!("{label}: rate at {rc:?}: {:?}", rate.first_violation()),
    );
    out.require(
        cert.rate_constant_used == rc.rate().ok(),
        format!("{label}: rate constant"),
    );
    let trace = build_sequence(&g, sys, 1.0, 100, 1e-9).unwrap();
    for (i, want) in first_ys.into_iter().enumerate() {
        out.require(
            (trace.y_seq[i] - want).abs() < 1e-15,
            format!("{label}: y{i} = {}", trace.y_seq[i]),
        );
    }
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let sp = common::unit();
    let d = |k: f64| SelfMap::divide(sp.clone(), k);
    // S = T.
    let s_eq_t = MapSystem::with_s_equal_t(d(3.0), d(6.0), d(12.0)).unwrap();
    corollary(
        &mut out,
        "S = T",
        &s_eq_t,
        ContractionForm::Max,
        None,
        0.0,
        [1.0 / 12.0, 1.0 / 48.0],
    );
    // A = B.
    let a_eq_b = MapSystem::with_a_equal_b(d(2.0), d(8.0), d(12.0)).unwrap();
    corollary(
        &mut out,
        "A = B",
        &a_eq_b,
        ContractionForm::Max,
        None,
        0.0,
        [1.0 / 12.0, 1.0 / 48.0],
    );
    // A = B = identity.
    let id_ab = MapSystem::with_identity_ab(d(3.0), d(4.0)).unwrap();
    corollary(
        &mut out,
        "A = B = id",
        &id_ab,
        ContractionForm::Max,
        None,
        0.0,
        [0.25, 1.0 / 12.0],
    );
    // A = B = identity and S = T.
    let single = MapSystem::single(d(2.0)).unwrap();
    corollary(
        &mut out,
        "single map",
        &single,
        ContractionForm::Max,
        Some(0.5),
        0.0,
        [0.5, 0.25],
    );
    for (label, sys) in [("S = T", &s_eq_t), ("A = B", &a_eq_b), ("single map", &single)] {
        out.require(!sys.aliases().is_empty(), format!("{label}: roles not aliased"));
    }
    // Sum form: S = T = x/10 + 0.45, A = B = identity, k = 1/4, rate 1/3.
    let toy = MapSystem::single(SelfMap::affine(sp.clone(), 0.1, 0.45)).unwrap();
    let g = constructors::from_metric_max(&MetricFn::absolute(sp.clone()).unwrap());
    let sum = check_condition_sum(&g, &toy, 0.25, &sp.pairs(), &Tolerance::default()).unwrap();
    out.require(sum.passed, format!("sum toy: {:?}", sum.first_violation()));
    out.require(RateConstant::Sum(0.25).rate().unwrap() == 1.0 / 3.0, "lambda");
    corollary(
        &mut out,
        "sum toy",
        &toy,
        ContractionForm::Sum,
        Some(0.25),
        0.5,
        [0.55, 0.505],
    );
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let strip = |mut r: RunReport| {
        r.wall_time_ms = 0;
        r.to_json()
    };
    for (name, _) in cli::BUILTIN {
        let mut commands = vec![Command::Check, Command::Solve];
        if name.starts_with("table") {
            commands.push(Command::Table);
        }
        for cmd in commands {
            for seed in [0, 7, 12345] {
                let o = Overrides {
                    seed: Some(seed),
                    ..Overrides::default()
                };
                let a = strip(cli::run(cmd, name, &o).unwrap());
                let b = strip(cli::run(cmd, name, &o).unwrap());
                out.require(a == b, format!("{name} {cmd:?} seed {seed} differs"));
            }
        }
    }
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            1,
            "example reproduction: z = 0, residuals, iterations, time, multi-start",
            criterion_1,
        ),
        (
            2,
            "rate bound at c = 0.5 and tail bound; y0 = 1/12, y1 = 1/36",
            criterion_2,
        ),
        (3, "axioms G1-G5 on every constructor output", criterion_3),
        (
            4,
            "basic properties (i)-(x) and d_G bounds on every constructor output",
            criterion_4,
        ),
        (
            5,
            "contraction discrepancy: h = 1/3 violated at (0, 1), h = 0.5 passes, estimate in [0.45, 0.55]",
            criterion_5,
        ),
        (6, "oracle equivalence on seeded finite scenarios", criterion_6),
        (
            7,
            "corollary reduction via aliasing; sum form with lambda = k/(1-k)",
            criterion_7,
        ),
        (8, "determinism of structured reports", criterion_8),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let out = run();
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let tag = match (out.passed, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        println!("criterion {id}: {tag}: {title}");
        for n in &out.notes {
            println!("    {n}");
        }
        if out.passed == expected_fail {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
