//! The ensemble of initial states obtained by running every horizon branch
//! backward to time 0, plus seeded sampling from it and forward replay.
//!
//! Random streams: every draw derives its generator from the run seed and a
//! stream index via [`substream`] (ChaCha8 with the index as the stream id).
//! [`sample`] uses stream 0. Bulk sampling splits draws into fixed blocks of
//! [`BLOCK_DRAWS`] and gives block `b` stream `b + 1`, so results do not depend
//! on how many workers process the blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::branching::{decompose, History};
use crate::error::{Error, Result};
use crate::schedule::EventSchedule;
use crate::statevec::StateVector;

/// Draws per random stream in bulk sampling.
pub const BLOCK_DRAWS: u64 = 4096;

/// Allowed drift of the total ensemble weight from 1 before sampling refuses.
pub const WEIGHT_SUM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleEntry {
    pub history: History,
    /// Sub-normalized: `‖initial_state‖² == weight`.
    pub initial_state: StateVector,
    pub weight: f64,
}

impl EnsembleEntry {
    /// Copy whose initial state has unit norm; `weight` keeps the draw probability.
    pub fn normalized(&self) -> Result<Self> {
        Ok(Self {
            history: self.history.clone(),
            initial_state: self.initial_state.normalized()?,
            weight: self.weight,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub expected_history: History,
    pub observed_history: History,
    /// Fraction of the norm outside the expected pattern right after each event.
    pub per_event_leakage: Vec<f64>,
    pub max_leakage: f64,
}

impl ReplayReport {
    pub fn is_faithful(&self, tol: f64) -> bool {
        self.observed_history == self.expected_history && self.max_leakage < tol
    }
}

/// Backward-evolves every retained branch from the horizon to time 0.
pub fn build_ensemble(schedule: &EventSchedule, psi0: &StateVector) -> Result<Vec<EnsembleEntry>> {
    decompose(schedule, psi0)?
        .into_iter()
        .map(|branch| {
            let initial_state = schedule.evolve_window(&branch.vector, schedule.horizon(), 0.0)?;
            let weight = initial_state.norm_sqr();
            Ok(EnsembleEntry {
                history: branch.history,
                initial_state,
                weight,
            })
        })
        .collect()
}

/// Generator for stream `stream` of run `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Cumulative weights for inverse-CDF draws, normalized to end at exactly 1.
#[derive(Clone, Debug)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(entries: &[EnsembleEntry]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if !((total - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::WeightsNotNormalized(total));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = entries
            .iter()
            .map(|e| {
                acc += e.weight / total;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(Self { cumulative })
    }

    /// Index of the entry selected by one uniform draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// One draw from the ensemble, returned with a unit-norm initial state.
pub fn sample(entries: &[EnsembleEntry], seed: u64) -> Result<EnsembleEntry> {
    let sampler = Sampler::new(entries)?;
    let index = sampler.draw(&mut substream(seed, 0));
    entries[index].normalized()
}

/// Index counts of `n` draws, block-parallel and independent of thread count.
pub fn sample_counts(entries: &[EnsembleEntry], n: u64, seed: u64) -> Result<Vec<u64>> {
    use rayon::prelude::*;

    let sampler = Sampler::new(entries)?;
    let blocks = n.div_ceil(BLOCK_DRAWS);
    let per_block: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b + 1);
            let draws = BLOCK_DRAWS.min(n - b * BLOCK_DRAWS);
            let mut counts = vec![0u64; entries.len()];
            for _ in 0..draws {
                counts[sampler.draw(&mut rng)] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; entries.len()];
    for block in per_block {
        for (c, b) in counts.iter_mut().zip(block) {
            *c += b;
        }
    }
    Ok(counts)
}

/// Evolves the entry forward, reading the record pattern right after each
/// event without ever projecting the state.
pub fn replay(entry: &EnsembleEntry, schedule: &EventSchedule) -> Result<ReplayReport> {
    let mut state = entry.initial_state.normalized()?;
    let events = schedule.events();
    if entry.history.len() != events.len() {
        return Err(Error::HistoryShape);
    }
    let mut observed = Vec::with_capacity(events.len());
    let mut per_event_leakage = Vec::with_capacity(events.len());
    let mut t = 0.0;
    for (k, (ev, expected)) in events.iter().zip(entry.history.results()).enumerate() {
        state = schedule.free_evolve(&state, ev.time - t)?;
        state = schedule.apply_event(&state, k)?;
        t = ev.time;
        let total = state.norm_sqr();
        let mut best = (0usize, f64::NEG_INFINITY);
        let mut selected = 0.0;
        for value in 0..ev.n_patterns() {
            let r = ev.pattern(value);
            let w = state.pattern_norm_sqr(&r)?;
            if w > best.1 {
                best = (value, w);
            }
            if &r == expected {
                selected = w;
            }
        }
        observed.push(ev.pattern(best.0));
        per_event_leakage.push(((total - selected) / total).max(0.0));
    }
    let max_leakage = per_event_leakage.iter().copied().fold(0.0, f64::max);
    Ok(ReplayReport {
        expected_history: entry.history.clone(),
        observed_history: History::new(observed),
        per_event_leakage,
        max_leakage,
    })
}
