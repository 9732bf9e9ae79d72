//! Histories of event results and the branch structure of the final state.
//!
//! A history picks one record pattern per event. Because every event writes
//! fresh record qubits that nothing later touches, a history is also a single
//! joint pattern on the union of all record sets. Two routes compute the
//! component of a history:
//!
//! * [`decompose`] evolves the full state to the horizon and sorts amplitudes
//!   by their joint record pattern;
//! * [`history_operator_apply`] walks the timeline, projecting onto each
//!   event's result right after it fires.
//!
//! The two routes agree up to the free evolution left between the last event
//! and the horizon.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::ensemble::EnsembleEntry;
use crate::error::{Error, Result};
use crate::schedule::EventSchedule;
use crate::statevec::{bit_of, BitAssignment, StateVector};

/// Default cap on the number of enumerated histories.
pub const MAX_HISTORIES: usize = 1 << 20;

/// Branches with weight at or below this are dropped.
pub const PRUNE_WEIGHT: f64 = 1e-12;

/// One result per event, in event order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    results: Vec<BitAssignment>,
}

impl History {
    pub fn new(results: Vec<BitAssignment>) -> Self {
        Self { results }
    }

    /// History number `key` of `schedule` in lexicographic order.
    pub fn from_key(schedule: &EventSchedule, key: u64) -> Self {
        let mut rest = key;
        let mut results: Vec<BitAssignment> = schedule
            .events()
            .iter()
            .rev()
            .map(|ev| {
                let k = ev.record_set.len();
                let value = (rest & ((1u64 << k) - 1)) as usize;
                rest >>= k;
                ev.pattern(value)
            })
            .collect();
        results.reverse();
        Self { results }
    }

    /// Parses a flat bit label such as `"0101"` or `"(0,1,0,1)"` against the
    /// schedule's record sets.
    pub fn parse(schedule: &EventSchedule, label: &str) -> Result<Self> {
        let bits: Vec<u8> = label
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ',' | ' ' | '|'))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::BadBitString(other)),
            })
            .collect::<Result<_>>()?;
        let total: usize = schedule.events().iter().map(|e| e.record_set.len()).sum();
        if bits.len() != total {
            return Err(Error::HistoryShape);
        }
        let mut offset = 0;
        let results = schedule
            .events()
            .iter()
            .map(|ev| {
                let k = ev.record_set.len();
                let r = BitAssignment::new(ev.record_set.clone(), bits[offset..offset + k].to_vec());
                offset += k;
                r
            })
            .collect::<Result<_>>()?;
        Ok(Self { results })
    }

    pub fn results(&self) -> &[BitAssignment] {
        &self.results
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// All record bits, event by event.
    pub fn bits(&self) -> Vec<u8> {
        self.results.iter().flat_map(|r| r.bits().iter().copied()).collect()
    }

    fn fits(&self, schedule: &EventSchedule) -> bool {
        self.results.len() == schedule.events().len()
            && self
                .results
                .iter()
                .zip(schedule.events())
                .all(|(r, ev)| r.qubits() == ev.record_set.as_slice())
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.bits().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for History {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Component of the horizon state carrying the records of one history.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub history: History,
    pub vector: StateVector,
    pub weight: f64,
}

fn record_bit_count(schedule: &EventSchedule) -> usize {
    schedule.events().iter().map(|e| e.record_set.len()).sum()
}

fn guard(schedule: &EventSchedule, max: usize) -> Result<u64> {
    let bits = record_bit_count(schedule);
    let count = 1u128 << bits.min(127);
    if count > max as u128 {
        return Err(Error::TooManyHistories { count, max });
    }
    Ok(count as u64)
}

/// Every candidate history, lexicographic with the first event's first record
/// qubit most significant.
pub fn enumerate_histories(schedule: &EventSchedule) -> Result<Vec<History>> {
    enumerate_histories_bounded(schedule, MAX_HISTORIES)
}

pub fn enumerate_histories_bounded(schedule: &EventSchedule, max: usize) -> Result<Vec<History>> {
    let count = guard(schedule, max)?;
    Ok((0..count).map(|key| History::from_key(schedule, key)).collect())
}

/// Joint record pattern of every amplitude index, as a history key.
fn history_keys(schedule: &EventSchedule) -> Vec<u64> {
    let n = schedule.n_qubits();
    let masks: Vec<usize> = schedule
        .events()
        .iter()
        .flat_map(|ev| ev.record_set.iter().map(|&q| 1usize << bit_of(n, q)))
        .collect();
    (0..1usize << n)
        .map(|index| {
            masks
                .iter()
                .fold(0u64, |key, m| key << 1 | u64::from(index & m != 0))
        })
        .collect()
}

/// Evolves `psi0` to the horizon and splits it by joint record pattern,
/// keeping branches heavier than [`PRUNE_WEIGHT`].
pub fn decompose(schedule: &EventSchedule, psi0: &StateVector) -> Result<Vec<Branch>> {
    decompose_bounded(schedule, psi0, MAX_HISTORIES)
}

pub fn decompose_bounded(schedule: &EventSchedule, psi0: &StateVector, max: usize) -> Result<Vec<Branch>> {
    guard(schedule, max)?;
    let final_state = schedule.evolve_window(psi0, 0.0, schedule.horizon())?;
    let n = final_state.n_qubits();
    let keys = history_keys(schedule);
    let mut buckets: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
    for (index, (&key, &amp)) in keys.iter().zip(final_state.amplitudes()).enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        buckets
            .entry(key)
            .or_insert_with(|| vec![Complex64::new(0.0, 0.0); 1 << n])[index] = amp;
    }
    buckets
        .into_iter()
        .map(|(key, amps)| {
            let vector = StateVector::from_amplitudes(n, amps)?;
            let weight = vector.norm_sqr();
            Ok(Branch {
                history: History::from_key(schedule, key),
                vector,
                weight,
            })
        })
        .filter(|b: &Result<Branch>| b.as_ref().map_or(true, |b| b.weight > PRUNE_WEIGHT))
        .collect()
}

/// `Q(h)|psi0>`: free evolution to each event, the event unitary, then the
/// projector onto that event's result. The returned vector sits just after
/// the last event.
pub fn history_operator_apply(
    psi0: &StateVector,
    schedule: &EventSchedule,
    h: &History,
) -> Result<StateVector> {
    if !h.fits(schedule) {
        return Err(Error::HistoryShape);
    }
    let mut state = psi0.clone();
    let mut t = 0.0;
    for (k, (ev, r)) in schedule.events().iter().zip(h.results()).enumerate() {
        state = schedule.free_evolve(&state, ev.time - t)?;
        state = schedule.apply_event(&state, k)?;
        state.project_in_place(r)?;
        t = ev.time;
    }
    Ok(state)
}

/// `‖Q(h)|psi0>‖²`.
pub fn born_weight(psi0: &StateVector, schedule: &EventSchedule, h: &History) -> Result<f64> {
    Ok(history_operator_apply(psi0, schedule, h)?.norm_sqr())
}

/// Largest `‖Q(h)|Ψ(h',0)>‖` over every candidate history `h` and ensemble
/// entry with a different history `h'`.
pub fn check_annihilation(schedule: &EventSchedule, ensemble: &[EnsembleEntry]) -> Result<f64> {
    let histories = enumerate_histories(schedule)?;
    let mut worst = 0.0f64;
    for h in &histories {
        for entry in ensemble.iter().filter(|e| &e.history != h) {
            let cross = history_operator_apply(&entry.initial_state, schedule, h)?;
            worst = worst.max(cross.norm_sqr().sqrt());
        }
    }
    Ok(worst)
}
