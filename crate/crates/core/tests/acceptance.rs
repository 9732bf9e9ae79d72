//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.
//!
//! `cargo test -p onebranch-core --test acceptance`

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use onebranch::branching::{born_weight, decompose, History};
use onebranch::ensemble::{build_ensemble, replay, substream};
use onebranch::experiments::{bell_correlation, bell_exact, build_bell_subsystem, build_bell_system, build_toy};
use onebranch::verify::{check_properties, random_model, random_state, random_unitary, PropertyDeviations};
use onebranch::{BitAssignment, BellConfig, StateVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const EXACT_TOL: f64 = 1e-10;
const SUITE_SEED: u64 = 20_240_917;
const BELL_SEED: u64 = 1_234_567;
const BELL_DRAWS: u64 = 100_000;
const RANDOM_SCHEDULES: u64 = 120;
const PROPERTY_CASES: u32 = 1000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took >= limit {
            o.passed = false;
        }
        o.detail = format!("{} [{:.3}s, limit {:.0}s]", o.detail, took.as_secs_f64(), limit.as_secs_f64());
    } else {
        o.detail = format!("{} [{:.3}s]", o.detail, took.as_secs_f64());
    }
    o
}

fn toy_branch_weights() -> Outcome {
    let (psi0, schedule) = build_toy();
    let branches = decompose(&schedule, &psi0).unwrap();
    let labels: Vec<String> = branches.iter().map(|b| b.history.to_string()).collect();
    let dev = branches.iter().map(|b| (b.weight - 0.5).abs()).fold(0.0, f64::max);
    outcome(
        labels == ["(0,1,0,1)", "(0,1,1,0)"] && dev < EXACT_TOL,
        format!("histories {labels:?}, max |w - 1/2| = {dev:.2e}"),
    )
}

fn toy_ensemble_states() -> Outcome {
    let (psi0, schedule) = build_toy();
    let entries = build_ensemble(&schedule, &psi0).unwrap();
    // (1/√2)(|up>|0000> ± |down>|1100>): indices 0b0_0000 and 0b1_1100
    let expected = |sign: f64| {
        let mut a = vec![Complex64::new(0.0, 0.0); 32];
        a[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        a[0b11100] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
        StateVector::from_vec(a).unwrap()
    };
    let mut worst = 0.0f64;
    let mut ok = entries.len() == 2;
    for (entry, (label, sign)) in entries.iter().zip([("(0,1,0,1)", 1.0), ("(0,1,1,0)", -1.0)]) {
        ok &= entry.history.to_string() == label;
        ok &= (entry.weight - 0.5).abs() < EXACT_TOL;
        let unit = entry.initial_state.normalized().unwrap();
        let target = expected(sign);
        let overlap = target.inner(&unit).unwrap();
        let aligned = unit.scaled(Complex64::from_polar(1.0, -overlap.arg()));
        worst = worst.max(aligned.max_abs_diff(&target).unwrap());
    }
    outcome(ok && worst < EXACT_TOL, format!("{} entries, max amplitude deviation {worst:.2e}", entries.len()))
}

fn toy_replay() -> Outcome {
    let (psi0, schedule) = build_toy();
    let entries = build_ensemble(&schedule, &psi0).unwrap();
    let mut worst = 0.0f64;
    let mut ok = !entries.is_empty();
    for entry in &entries {
        let report = replay(entry, &schedule).unwrap();
        ok &= report.observed_history == entry.history;
        worst = worst.max(report.max_leakage);
    }
    outcome(ok && worst < EXACT_TOL, format!("{} entries replayed, max leakage {worst:.2e}", entries.len()))
}

/// Shared randomized suite for criteria 4-6: at most 4 qubits, at most 2 events.
fn random_suite() -> PropertyDeviations {
    let shapes = [(2, 0), (2, 1), (3, 1), (3, 2), (4, 1), (4, 2)];
    let mut max = PropertyDeviations::default();
    for trial in 0..RANDOM_SCHEDULES {
        let (n, e) = shapes[trial as usize % shapes.len()];
        let mut rng = substream(SUITE_SEED, trial);
        let (psi0, schedule) = random_model(&mut rng, n, e).unwrap();
        max = max.max_with(&check_properties(&psi0, &schedule).unwrap());
    }
    max
}

fn toy_bell_exact() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=12 {
        let theta = k as f64 * PI / 12.0;
        worst = worst.max((bell_exact(theta).unwrap() + theta.cos()).abs());
    }
    outcome(worst < EXACT_TOL, format!("max |E(θ) + cos θ| over 13 angles = {worst:.2e}"))
}

fn bell_sampled() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for theta in [0.0, PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI] {
        let r = bell_correlation(&BellConfig {
            theta,
            n_subsystems: BELL_DRAWS,
            seed: BELL_SEED,
        })
        .unwrap();
        let bound = 4.0 * ((1.0 - theta.cos().powi(2)).max(0.0) / BELL_DRAWS as f64).sqrt();
        let gap = (r.estimate + theta.cos()).abs();
        let pass = if theta == 0.0 || theta == PI {
            r.estimate == -theta.cos()
        } else {
            gap <= bound
        };
        ok &= pass;
        lines.push(format!("θ={theta:.4}: {:.4} (gap {gap:.4} ≤ {bound:.4})", r.estimate));
    }
    outcome(ok, lines.join(", "))
}

fn bell_factorization() -> Outcome {
    let theta = PI / 3.0;
    let (pair_psi0, pair) = build_bell_system(theta, 2).unwrap();
    let (one_psi0, one) = build_bell_subsystem(theta).unwrap();
    let branches = decompose(&pair, &pair_psi0).unwrap();
    let mut worst = 0.0f64;
    for b in &branches {
        let bits = b.history.bits();
        let label = |b: &[u8]| b.iter().map(u8::to_string).collect::<String>();
        let first = History::parse(&one, &label(&bits[..4])).unwrap();
        let second = History::parse(&one, &label(&bits[4..])).unwrap();
        let product = born_weight(&one_psi0, &one, &first).unwrap() * born_weight(&one_psi0, &one, &second).unwrap();
        worst = worst.max((b.weight - product).abs());
    }
    outcome(
        branches.len() == 16 && worst < EXACT_TOL,
        format!("{} joint histories on 12 qubits, max |w - w1·w2| = {worst:.2e}", branches.len()),
    )
}

fn numerical_hygiene() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let shapes = (any::<u64>(), 1usize..=5, 0usize..=3).prop_map(|(s, n, e)| (s, n, if n == 1 { 0 } else { e.min(n - 1) }));
    let result = runner.run(&shapes, |(seed, n, e)| {
        let mut rng = substream(seed, 0);
        let (psi0, schedule) = random_model(&mut rng, n, e).unwrap();
        let forward = schedule.evolve_window(&psi0, 0.0, schedule.horizon()).unwrap();
        let back = schedule.evolve_window(&forward, schedule.horizon(), 0.0).unwrap();
        prop_assert!(back.max_abs_diff(&psi0).unwrap() < EXACT_TOL, "round trip");

        for (k, ev) in schedule.events().iter().enumerate() {
            let s = random_state(&mut rng, n).unwrap();
            let after = schedule.apply_event(&s, k).unwrap();
            prop_assert!((after.norm_sqr() - s.norm_sqr()).abs() < 1e-12, "unitarity");
            let total: f64 = (0..ev.n_patterns())
                .map(|v| s.project(&ev.pattern(v)).unwrap().norm_sqr())
                .sum();
            prop_assert!((total - s.norm_sqr()).abs() < 1e-12, "completeness");
        }
        let k = 1 + (seed as usize % n.min(3));
        let u = random_unitary(&mut rng, 1 << k).unwrap();
        let targets: Vec<usize> = (0..k).collect();
        let out = psi0.apply_local_unitary(&u, &targets).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12, "local unitarity");
        let r = BitAssignment::from_pattern(&targets, seed as usize % (1 << k));
        let p = psi0.project(&r).unwrap();
        prop_assert_eq!(p.project(&r).unwrap(), p, "idempotence");
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, format!("{PROPERTY_CASES} randomized cases: round trip, unitarity, projector completeness")),
        Err(e) => outcome(false, format!("counterexample: {e}")),
    }
}

fn main() -> ExitCode {
    let suite_start = Instant::now();
    let suite = random_suite();
    let suite_time = suite_start.elapsed();
    let suite_detail = |value: f64, what: &str| format!("{RANDOM_SCHEDULES} schedules, max {what} {value:.2e} [suite {:.3}s, limit 30s]", suite_time.as_secs_f64());
    let suite_in_time = suite_time < Duration::from_secs(30);

    let results: Vec<(&str, Outcome)> = vec![
        ("AC1 toy branch weights", timed(Some(Duration::from_secs(1)), toy_branch_weights)),
        ("AC2 toy ensemble states", timed(Some(Duration::from_secs(1)), toy_ensemble_states)),
        ("AC3 replay determinism", timed(None, toy_replay)),
        (
            "AC4 Born-rule equivalence",
            outcome(
                suite_in_time && suite.born < EXACT_TOL && suite.normalization < EXACT_TOL,
                suite_detail(suite.born.max(suite.normalization), "|⟨Ψ(h,0)|Ψ(h,0)⟩ - ‖Q(h)Ψ(0)‖²|"),
            ),
        ),
        (
            "AC5 annihilation",
            outcome(suite.annihilation < EXACT_TOL, suite_detail(suite.annihilation, "‖Q(h)Ψ(h',0)‖")),
        ),
        (
            "AC6 completeness",
            outcome(
                suite.completeness < EXACT_TOL && suite.path_equivalence < EXACT_TOL,
                suite_detail(suite.completeness.max(suite.path_equivalence), "amplitude deviation"),
            ),
        ),
        ("AC7 Bell exact correlation", timed(Some(Duration::from_secs(1)), toy_bell_exact)),
        ("AC8 Bell sampled correlation", timed(Some(Duration::from_secs(10)), bell_sampled)),
        ("AC9 Bell factorization", timed(None, bell_factorization)),
        ("AC10 numerical hygiene", timed(None, numerical_hygiene)),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
