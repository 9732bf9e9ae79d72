use std::path::Path;

use anyhow::{bail, Context, Result};
use onebranch::branching::decompose;
use onebranch::config::{parse_schedule, schedule_hash, ScheduleFile};
use onebranch::ensemble::{build_ensemble, replay, sample, sample_counts};
use onebranch::experiments::{bell_correlation, build_bell_subsystem, build_toy};
use onebranch::verify::{check_properties, run_verification, VerificationReport, PROPERTY_TOL};
use onebranch::{BellConfig, EventSchedule, StateVector};

use crate::report::{BellReport, BellRow, BranchRow, Check, EnsembleRow, ModelReport, SampleReport, Tolerances};

/// `|estimate - exact|` must stay within this many standard errors.
pub const BELL_SIGMA_BOUND: f64 = 4.0;

pub const MAX_VERIFY_QUBITS: usize = 6;
pub const MAX_VERIFY_EVENTS: usize = 3;

pub fn load_model(path: &Path) -> Result<(StateVector, EventSchedule)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_schedule(&text).with_context(|| format!("in schedule file {}", path.display()))
}

/// Decomposes, builds and replays the ensemble, and checks every invariant.
pub fn analyze_model(psi0: &StateVector, schedule: &EventSchedule, seed: u64, amplitudes: bool) -> Result<ModelReport> {
    let branches = decompose(schedule, psi0)?;
    let ensemble = build_ensemble(schedule, psi0)?;
    let replays = ensemble
        .iter()
        .map(|e| replay(e, schedule))
        .collect::<onebranch::Result<Vec<_>>>()?;
    let dev = check_properties(psi0, schedule)?;

    let mut checks: Vec<Check> = dev.named().iter().map(|(n, v)| Check::below(n, *v, PROPERTY_TOL)).collect();
    let max_leakage = replays.iter().map(|r| r.max_leakage).fold(0.0, f64::max);
    checks.push(Check::below("replay_leakage", max_leakage, PROPERTY_TOL));
    let mismatched = replays.iter().filter(|r| r.observed_history != r.expected_history).count();
    checks.push(Check::below("replay_history_mismatches", mismatched as f64, 0.5));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ModelReport {
        seed,
        tolerances: Tolerances::default(),
        schedule_hash: schedule_hash(psi0, schedule),
        n_qubits: schedule.n_qubits(),
        n_events: schedule.events().len(),
        branches: branches
            .iter()
            .map(|b| BranchRow {
                history: b.history.to_string(),
                weight: b.weight,
            })
            .collect(),
        ensemble: ensemble
            .iter()
            .map(|e| EnsembleRow {
                history: e.history.to_string(),
                weight: e.weight,
                amplitudes: amplitudes.then(|| e.initial_state.amplitudes().iter().map(|a| [a.re, a.im]).collect()),
            })
            .collect(),
        replay: replays,
        checks,
        passed,
    })
}

pub fn run_toy(seed: u64) -> Result<ModelReport> {
    let (psi0, schedule) = build_toy();
    analyze_model(&psi0, &schedule, seed, true)
}

pub fn run_decompose(path: &Path, seed: u64, amplitudes: bool) -> Result<ModelReport> {
    let (psi0, schedule) = load_model(path)?;
    analyze_model(&psi0, &schedule, seed, amplitudes)
}

pub fn run_bell(grid: &[f64], n: u64, seed: u64) -> Result<BellReport> {
    if grid.is_empty() {
        bail!("empty theta grid");
    }
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let rows = grid
        .iter()
        .map(|&theta| {
            let result = bell_correlation(&BellConfig {
                theta,
                n_subsystems: n,
                seed,
            })
            .with_context(|| format!("theta = {theta}"))?;
            let (psi0, schedule) = build_bell_subsystem(theta)?;
            Ok(BellRow {
                passed: result.within(BELL_SIGMA_BOUND),
                schedule_hash: schedule_hash(&psi0, &schedule),
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.passed);
    Ok(BellReport {
        seed,
        tolerances: Tolerances::default(),
        sigma_bound: BELL_SIGMA_BOUND,
        rows,
        passed,
    })
}

pub fn run_verify_born(n_qubits: usize, n_events: usize, trials: u64, seed: u64) -> Result<VerificationReport> {
    if n_qubits > MAX_VERIFY_QUBITS || n_events > MAX_VERIFY_EVENTS {
        bail!("verify-born is limited to {MAX_VERIFY_QUBITS} qubits and {MAX_VERIFY_EVENTS} events");
    }
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    Ok(run_verification(n_qubits, n_events, trials, seed)?)
}

/// Property checks on a user-supplied schedule; validation happens while loading.
pub fn run_verify_file(path: &Path, seed: u64) -> Result<ModelReport> {
    run_decompose(path, seed, false)
}

pub fn run_sample_replay(config: Option<&Path>, seed: u64, n: Option<u64>) -> Result<SampleReport> {
    let (psi0, schedule) = match config {
        Some(p) => load_model(p)?,
        None => build_toy(),
    };
    let ensemble = build_ensemble(&schedule, &psi0)?;
    let drawn = sample(&ensemble, seed)?;
    let report = replay(&drawn, &schedule)?;
    let counts = match n {
        Some(n) => {
            let c = sample_counts(&ensemble, n, seed)?;
            Some(ensemble.iter().map(|e| e.history.to_string()).zip(c).collect())
        }
        None => None,
    };
    Ok(SampleReport {
        seed,
        tolerances: Tolerances::default(),
        schedule_hash: schedule_hash(&psi0, &schedule),
        drawn_history: drawn.history.to_string(),
        weight: drawn.weight,
        passed: report.is_faithful(PROPERTY_TOL),
        replay: report,
        counts,
    })
}

/// Counterexample schedule as a TOML document.
pub fn counterexample_toml(report: &VerificationReport) -> Result<Option<String>> {
    report
        .counterexample
        .as_ref()
        .map(|c| -> Result<String> { Ok(ScheduleFile::to_toml(&c.schedule)?) })
        .transpose()
}
