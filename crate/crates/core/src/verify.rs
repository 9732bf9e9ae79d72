//! Randomized schedules and the equivalence checks between the ensemble
//! picture and sequential Born-rule observation.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::branching::{check_annihilation, decompose, enumerate_histories, history_operator_apply};
use crate::config::ScheduleFile;
use crate::ensemble::{build_ensemble, substream};
use crate::error::{Error, Result};
use crate::schedule::{EventSchedule, RecordQubit, SplittingEvent, SystemSpec};
use crate::statevec::{StateVector, UnitaryMatrix};

/// Threshold every property deviation must stay under.
pub const PROPERTY_TOL: f64 = 1e-10;

pub const MAX_RANDOM_QUBITS: usize = 6;
pub const MAX_RANDOM_EVENTS: usize = 3;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a complex
/// Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<UnitaryMatrix> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for c in &cols {
                let proj: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            entries[r * dim + c] = *x;
        }
    }
    UnitaryMatrix::new(dim, entries)
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> Result<StateVector> {
    let amps = (0..1usize << n_qubits).map(|_| gaussian(rng)).collect();
    StateVector::from_amplitudes(n_qubits, amps)?.normalized()
}

/// A valid random schedule with `n_events` events. Each event owns at least
/// one fresh record qubit and acts on its records plus a nonempty random
/// subset of the system qubits; at least one system qubit always remains.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    n_qubits: usize,
    n_events: usize,
) -> Result<(StateVector, EventSchedule)> {
    if n_qubits == 0 || n_qubits > MAX_RANDOM_QUBITS || n_events > MAX_RANDOM_EVENTS {
        return Err(Error::InvalidArgument(format!(
            "random schedules need 1..={MAX_RANDOM_QUBITS} qubits and at most {MAX_RANDOM_EVENTS} events"
        )));
    }
    if n_events > 0 && n_qubits < n_events + 1 {
        return Err(Error::InvalidArgument(format!(
            "{n_events} events need at least {} qubits",
            n_events + 1
        )));
    }
    let mut qubits: Vec<usize> = (0..n_qubits).collect();
    qubits.shuffle(rng);
    let n_records = if n_events == 0 {
        0
    } else {
        rng.gen_range(n_events..n_qubits)
    };
    let (record_pool, system) = qubits.split_at(n_records);
    // every event gets one record, the rest are dealt out at random
    let mut owner: Vec<usize> = (0..n_records).map(|i| if i < n_events { i } else { rng.gen_range(0..n_events) }).collect();
    owner.shuffle(rng);

    let spec = loop {
        let records = record_pool
            .iter()
            .map(|&qubit| RecordQubit {
                qubit,
                omega: rng.gen_range(0.5..3.0),
            })
            .collect();
        let spec = SystemSpec::new(n_qubits, records);
        if spec.min_phase_gap().map_or(true, |g| g > 1e-6) {
            break spec;
        }
    };

    let mut time = 0.0;
    let mut events = Vec::with_capacity(n_events);
    for k in 0..n_events {
        time += rng.gen_range(0.1..1.0);
        let records: Vec<usize> = record_pool
            .iter()
            .zip(&owner)
            .filter(|(_, &o)| o == k)
            .map(|(&q, _)| q)
            .collect();
        let mut targets: Vec<usize> = system.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if targets.is_empty() {
            targets.push(*system.choose(rng).expect("at least one system qubit"));
        }
        targets.extend(&records);
        targets.shuffle(rng);
        let u = random_unitary(rng, 1 << targets.len())?;
        events.push(SplittingEvent::new(time, u, targets, records));
    }
    let horizon = time + rng.gen_range(0.1..1.0);
    let schedule = EventSchedule::new(spec, events, horizon)?;
    let psi0 = random_state(rng, n_qubits)?;
    Ok((psi0, schedule))
}

/// Largest deviation seen for each property.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PropertyDeviations {
    /// `|‖Ψ(h,0)‖² - ‖Q(h)Ψ(0)‖²|` over all histories.
    pub born: f64,
    /// `‖Q(h)Ψ(h',0)‖` over `h ≠ h'`.
    pub annihilation: f64,
    /// Per-amplitude `|Σ_h Ψ(h,0) - Ψ(0)|`.
    pub completeness: f64,
    /// Per-amplitude gap between a decomposed branch and its history-operator image at the horizon.
    pub path_equivalence: f64,
    /// `|Σ_h ‖Q(h)Ψ(0)‖² - 1|`.
    pub normalization: f64,
}

impl PropertyDeviations {
    pub fn max_with(&self, other: &Self) -> Self {
        Self {
            born: self.born.max(other.born),
            annihilation: self.annihilation.max(other.annihilation),
            completeness: self.completeness.max(other.completeness),
            path_equivalence: self.path_equivalence.max(other.path_equivalence),
            normalization: self.normalization.max(other.normalization),
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("born_agreement", self.born),
            ("annihilation", self.annihilation),
            ("completeness", self.completeness),
            ("path_equivalence", self.path_equivalence),
            ("weight_normalization", self.normalization),
        ]
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.named().iter().all(|(_, v)| *v < tol)
    }
}

/// Runs every equivalence check on one model.
pub fn check_properties(psi0: &StateVector, schedule: &EventSchedule) -> Result<PropertyDeviations> {
    let ensemble = build_ensemble(schedule, psi0)?;
    let histories = enumerate_histories(schedule)?;
    let mut dev = PropertyDeviations::default();

    let mut total = 0.0;
    for h in &histories {
        let chain = history_operator_apply(psi0, schedule, h)?.norm_sqr();
        total += chain;
        let backward = ensemble.iter().find(|e| &e.history == h).map_or(0.0, |e| e.initial_state.norm_sqr());
        dev.born = dev.born.max((chain - backward).abs());
    }
    dev.normalization = (total - psi0.norm_sqr()).abs();

    dev.annihilation = check_annihilation(schedule, &ensemble)?;

    let mut sum = StateVector::zero(psi0.n_qubits())?;
    for e in &ensemble {
        sum = sum.add(&e.initial_state)?;
    }
    dev.completeness = sum.max_abs_diff(psi0)?;

    let t_last = schedule.events().last().map_or(0.0, |e| e.time);
    for branch in decompose(schedule, psi0)? {
        let q = history_operator_apply(psi0, schedule, &branch.history)?;
        let at_horizon = schedule.free_evolve(&q, schedule.horizon() - t_last)?;
        dev.path_equivalence = dev.path_equivalence.max(at_horizon.max_abs_diff(&branch.vector)?);
    }
    Ok(dev)
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub deviations: PropertyDeviations,
    pub schedule: ScheduleFile,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub n_qubits: usize,
    pub n_events: usize,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_deviation: PropertyDeviations,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

/// `trials` random models, trial `i` drawn from stream `i` of `seed`. Stops at
/// the first model that breaks a property and keeps it as a counterexample.
pub fn run_verification(n_qubits: usize, n_events: usize, trials: u64, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let mut max = PropertyDeviations::default();
    let mut counterexample = None;
    for trial in 0..trials {
        let mut rng = substream(seed, trial);
        let (psi0, schedule) = random_model(&mut rng, n_qubits, n_events)?;
        let dev = check_properties(&psi0, &schedule)?;
        max = max.max_with(&dev);
        if !dev.all_below(PROPERTY_TOL) {
            counterexample = Some(Counterexample {
                trial,
                deviations: dev,
                schedule: ScheduleFile::from_model(&psi0, &schedule),
            });
            break;
        }
    }
    Ok(VerificationReport {
        n_qubits,
        n_events,
        trials,
        seed,
        tolerance: PROPERTY_TOL,
        max_deviation: max,
        passed: counterexample.is_none(),
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::build_toy;

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = substream(11, 0);
        for d in [2, 4, 8, 16] {
            assert!(random_unitary(&mut rng, d).unwrap().unitarity_deviation() < 1e-13);
        }
    }

    #[test]
    fn random_models_validate() {
        for seed in 0..50 {
            let mut rng = substream(seed, 0);
            let n = 2 + (seed as usize % 5);
            let events = (seed as usize % 4).min(n - 1);
            let (psi0, s) = random_model(&mut rng, n, events).unwrap();
            assert!(s.validate().is_empty());
            assert_eq!(s.events().len(), events);
            assert!(psi0.is_normalized());
        }
    }

    #[test]
    fn random_model_bounds() {
        let mut rng = substream(1, 0);
        assert!(random_model(&mut rng, 7, 1).is_err());
        assert!(random_model(&mut rng, 4, 4).is_err());
        assert!(random_model(&mut rng, 2, 2).is_err());
    }

    #[test]
    fn toy_properties_hold() {
        let (psi0, schedule) = build_toy();
        let dev = check_properties(&psi0, &schedule).unwrap();
        assert!(dev.all_below(PROPERTY_TOL), "{dev:?}");
    }

    #[test]
    fn zero_event_trial_passes() {
        let r = run_verification(3, 0, 1, 9).unwrap();
        assert!(r.passed);
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn verification_is_reproducible() {
        let a = run_verification(3, 2, 5, 77).unwrap();
        let b = run_verification(3, 2, 5, 77).unwrap();
        assert_eq!(a.max_deviation, b.max_deviation);
        assert!(a.passed);
    }
}
