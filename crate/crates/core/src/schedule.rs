//! System description and the timeline of splitting events.
//!
//! Between events the register evolves under a Hamiltonian that is diagonal in
//! the computational basis, `H = Σ ω_q n_q` over the record qubits. Each event
//! is instantaneous: free evolution covers `[t_{k-1}, t_k)`, then the event
//! unitary fires at `t_k`. A state "at time t" has had every event with
//! `t_k < t` applied, so a window `[t_from, t_to)` contains the events whose
//! time falls inside it.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{BitAssignment, StateVector, UnitaryMatrix, MAX_QUBITS};

/// Minimum separation between distinct phase sums `Σ ω_q e_q`.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Largest record set whose phase sums are checked by enumeration.
const MAX_DEGENERACY_RECORDS: usize = 24;

/// An environment qubit with its free-evolution frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordQubit {
    pub qubit: usize,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n_qubits: usize,
    pub records: Vec<RecordQubit>,
}

impl SystemSpec {
    pub fn new(n_qubits: usize, records: Vec<RecordQubit>) -> Self {
        Self { n_qubits, records }
    }

    /// Indices that are not record qubits, ascending.
    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|q| !self.records.iter().any(|r| r.qubit == *q))
            .collect()
    }

    pub fn is_record(&self, qubit: usize) -> bool {
        self.records.iter().any(|r| r.qubit == qubit)
    }

    pub fn omega(&self, qubit: usize) -> Option<f64> {
        self.records.iter().find(|r| r.qubit == qubit).map(|r| r.omega)
    }

    /// `(qubit, ω)` pairs for [`StateVector::evolve_diagonal`].
    pub fn frequencies(&self) -> Vec<(usize, f64)> {
        self.records.iter().map(|r| (r.qubit, r.omega)).collect()
    }

    /// Smallest gap between two achievable phase sums, `None` with fewer than
    /// two patterns.
    pub fn min_phase_gap(&self) -> Option<f64> {
        let k = self.records.len();
        if k == 0 || k > MAX_DEGENERACY_RECORDS {
            return None;
        }
        let mut sums = vec![0.0f64; 1 << k];
        for (i, r) in self.records.iter().enumerate() {
            let step = 1 << i;
            for pattern in step..(step << 1) {
                sums[pattern] = sums[pattern - step] + r.omega;
            }
        }
        sums.sort_by(|a, b| a.total_cmp(b));
        sums.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            out.push(Violation::QubitCount(self.n_qubits));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.qubit >= self.n_qubits {
                out.push(Violation::RecordOutOfRange(r.qubit));
            }
            if self.records[..i].iter().any(|p| p.qubit == r.qubit) {
                out.push(Violation::DuplicateRecord(r.qubit));
            }
            if !r.omega.is_finite() {
                out.push(Violation::NonFiniteOmega(r.qubit));
            }
        }
        if let Some(gap) = self.min_phase_gap() {
            if gap < DEGENERACY_TOL {
                out.push(Violation::DegeneratePhases(gap));
            }
        }
    }
}

/// Which basis an event unitary is written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFrame {
    /// The unitary acts on the co-moving memory states `|e, t> = exp(-iHt)|e>`,
    /// so at time `t` the register sees `D(t) U D(t)†` with `D(t) = exp(-iHt)`.
    #[default]
    Memory,
    /// The unitary acts on the static computational basis.
    Lab,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingEvent {
    pub time: f64,
    pub unitary: UnitaryMatrix,
    pub targets: Vec<usize>,
    /// Record qubits written by this event, ascending.
    pub record_set: Vec<usize>,
}

impl SplittingEvent {
    pub fn new(time: f64, unitary: UnitaryMatrix, targets: Vec<usize>, mut record_set: Vec<usize>) -> Self {
        record_set.sort_unstable();
        Self {
            time,
            unitary,
            targets,
            record_set,
        }
    }

    /// Number of distinct results this event can produce.
    pub fn n_patterns(&self) -> usize {
        1 << self.record_set.len()
    }

    pub fn pattern(&self, value: usize) -> BitAssignment {
        BitAssignment::from_pattern(&self.record_set, value)
    }
}

/// One broken invariant, naming the offending element.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    QubitCount(usize),
    RecordOutOfRange(usize),
    DuplicateRecord(usize),
    NonFiniteOmega(usize),
    DegeneratePhases(f64),
    BadTime { event: usize, time: f64 },
    TimesNotIncreasing { event: usize },
    HorizonNotAfterLastEvent { horizon: f64, last: f64 },
    TargetOutOfRange { event: usize, qubit: usize },
    DuplicateTarget { event: usize, qubit: usize },
    UnitaryDimension { event: usize, expected: usize, found: usize },
    EmptyRecordSet { event: usize },
    RecordNotTargeted { event: usize, qubit: usize },
    NotARecordQubit { event: usize, qubit: usize },
    RecordSetsOverlap { first: usize, second: usize, qubit: usize },
    RecordRewritten { writer: usize, later: usize, qubit: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            QubitCount(n) => write!(f, "qubit count {n} outside [1, {MAX_QUBITS}]"),
            RecordOutOfRange(q) => write!(f, "record qubit {q} out of range"),
            DuplicateRecord(q) => write!(f, "record qubit {q} declared twice"),
            NonFiniteOmega(q) => write!(f, "frequency of record qubit {q} is not finite"),
            DegeneratePhases(gap) => {
                write!(f, "degenerate phase sums: two record patterns differ by {gap:.3e}")
            }
            BadTime { event, time } => write!(f, "event {event}: time {time} must be finite and >= 0"),
            TimesNotIncreasing { event } => {
                write!(f, "event {event}: times not strictly increasing")
            }
            HorizonNotAfterLastEvent { horizon, last } => {
                write!(f, "horizon {horizon} not after last event time {last}")
            }
            TargetOutOfRange { event, qubit } => {
                write!(f, "event {event}: target {qubit} out of range")
            }
            DuplicateTarget { event, qubit } => {
                write!(f, "event {event}: target {qubit} listed twice")
            }
            UnitaryDimension {
                event,
                expected,
                found,
            } => write!(f, "event {event}: unitary dimension {found}, targets need {expected}"),
            EmptyRecordSet { event } => write!(f, "event {event}: empty record set"),
            RecordNotTargeted { event, qubit } => {
                write!(f, "event {event}: record qubit {qubit} not among the unitary targets")
            }
            NotARecordQubit { event, qubit } => {
                write!(f, "event {event}: qubit {qubit} has no declared frequency")
            }
            RecordSetsOverlap {
                first,
                second,
                qubit,
            } => write!(f, "record sets not disjoint: events {first} and {second} share qubit {qubit}"),
            RecordRewritten { writer, later, qubit } => write!(
                f,
                "record not permanent: event {later} targets qubit {qubit} recorded by event {writer}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventSchedule {
    spec: SystemSpec,
    events: Vec<SplittingEvent>,
    horizon: f64,
    frame: EventFrame,
    checked: bool,
}

impl EventSchedule {
    /// Validated schedule in the default memory frame.
    pub fn new(spec: SystemSpec, events: Vec<SplittingEvent>, horizon: f64) -> Result<Self> {
        Self::unchecked(spec, events, horizon).checked()
    }

    /// Schedule that has not been validated yet. Evolution on it validates first.
    pub fn unchecked(spec: SystemSpec, events: Vec<SplittingEvent>, horizon: f64) -> Self {
        Self {
            spec,
            events,
            horizon,
            frame: EventFrame::default(),
            checked: false,
        }
    }

    pub fn with_frame(mut self, frame: EventFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn checked(mut self) -> Result<Self> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(Error::InvalidSchedule(v));
        }
        self.checked = true;
        Ok(self)
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn events(&self) -> &[SplittingEvent] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn frame(&self) -> EventFrame {
        self.frame
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    /// Every broken invariant; empty iff the schedule is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.spec.violations(&mut out);
        let n = self.spec.n_qubits;
        for (k, ev) in self.events.iter().enumerate() {
            if !ev.time.is_finite() || ev.time < 0.0 {
                out.push(Violation::BadTime { event: k, time: ev.time });
            }
            if k > 0 && !(ev.time > self.events[k - 1].time) {
                out.push(Violation::TimesNotIncreasing { event: k });
            }
            for (i, &q) in ev.targets.iter().enumerate() {
                if q >= n {
                    out.push(Violation::TargetOutOfRange { event: k, qubit: q });
                }
                if ev.targets[..i].contains(&q) {
                    out.push(Violation::DuplicateTarget { event: k, qubit: q });
                }
            }
            let expected = 1usize.checked_shl(ev.targets.len() as u32).unwrap_or(0);
            if ev.unitary.dim() != expected {
                out.push(Violation::UnitaryDimension {
                    event: k,
                    expected,
                    found: ev.unitary.dim(),
                });
            }
            if ev.record_set.is_empty() {
                out.push(Violation::EmptyRecordSet { event: k });
            }
            for &q in &ev.record_set {
                if !ev.targets.contains(&q) {
                    out.push(Violation::RecordNotTargeted { event: k, qubit: q });
                }
                if !self.spec.is_record(q) {
                    out.push(Violation::NotARecordQubit { event: k, qubit: q });
                }
            }
            for (j, earlier) in self.events[..k].iter().enumerate() {
                for &q in &ev.record_set {
                    if earlier.record_set.contains(&q) {
                        out.push(Violation::RecordSetsOverlap {
                            first: j,
                            second: k,
                            qubit: q,
                        });
                    }
                }
                for &q in &earlier.record_set {
                    if ev.targets.contains(&q) && !ev.record_set.contains(&q) {
                        out.push(Violation::RecordRewritten {
                            writer: j,
                            later: k,
                            qubit: q,
                        });
                    }
                }
            }
        }
        let last = self.events.last().map_or(0.0, |e| e.time);
        let after_last = if self.events.is_empty() {
            self.horizon >= 0.0
        } else {
            self.horizon > last
        };
        if !self.horizon.is_finite() || !after_last {
            out.push(Violation::HorizonNotAfterLastEvent {
                horizon: self.horizon,
                last,
            });
        }
        out
    }

    fn ensure_valid(&self) -> Result<()> {
        if self.checked {
            return Ok(());
        }
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSchedule(v))
        }
    }

    fn check_state(&self, s: &StateVector) -> Result<()> {
        if s.n_qubits() != self.spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.spec.n_qubits,
                found: s.dim(),
            });
        }
        Ok(())
    }

    /// The matrix the register actually sees when event `k` fires.
    pub fn effective_unitary(&self, k: usize) -> Result<UnitaryMatrix> {
        let ev = &self.events[k];
        match self.frame {
            EventFrame::Lab => Ok(ev.unitary.clone()),
            EventFrame::Memory => {
                let m = ev.targets.len();
                let diag: Vec<Complex64> = (0..1usize << m)
                    .map(|local| {
                        let energy: f64 = ev
                            .targets
                            .iter()
                            .enumerate()
                            .filter(|(pos, _)| local >> (m - 1 - pos) & 1 == 1)
                            .filter_map(|(_, &q)| self.spec.omega(q))
                            .sum();
                        Complex64::from_polar(1.0, -ev.time * energy)
                    })
                    .collect();
                ev.unitary.conjugate_by_diagonal(&diag)
            }
        }
    }

    /// Free diagonal evolution by `dt`; negative `dt` runs backward.
    pub fn free_evolve(&self, s: &StateVector, dt: f64) -> Result<StateVector> {
        self.check_state(s)?;
        s.evolve_diagonal(&self.spec.frequencies(), dt)
    }

    /// Fires event `k` on a state sitting at time `t_k`.
    pub fn apply_event(&self, s: &StateVector, k: usize) -> Result<StateVector> {
        self.check_state(s)?;
        let u = self.effective_unitary(k)?;
        s.apply_local_unitary(&u, &self.events[k].targets)
    }

    /// Evolves `s` from `t_from` to `t_to`, running events in reverse with
    /// inverse unitaries when `t_to < t_from`.
    pub fn evolve_window(&self, s: &StateVector, t_from: f64, t_to: f64) -> Result<StateVector> {
        self.ensure_valid()?;
        self.check_state(s)?;
        let freqs = self.spec.frequencies();
        let mut state = s.clone();
        let mut t = t_from;
        if t_to >= t_from {
            for (k, ev) in self.events.iter().enumerate() {
                if ev.time >= t_from && ev.time < t_to {
                    state.evolve_diagonal_in_place(&freqs, ev.time - t)?;
                    state.apply_local_in_place(&self.effective_unitary(k)?, &ev.targets)?;
                    t = ev.time;
                }
            }
        } else {
            for (k, ev) in self.events.iter().enumerate().rev() {
                if ev.time >= t_to && ev.time < t_from {
                    state.evolve_diagonal_in_place(&freqs, ev.time - t)?;
                    state.apply_local_in_place(&self.effective_unitary(k)?.dagger(), &ev.targets)?;
                    t = ev.time;
                }
            }
        }
        state.evolve_diagonal_in_place(&freqs, t_to - t)?;
        Ok(state)
    }

    /// Splits a state taken just after an event into its components on every
    /// record pattern of that event.
    pub fn event_unitary_record(
        &self,
        event: &SplittingEvent,
        s: &StateVector,
    ) -> Result<BTreeMap<BitAssignment, StateVector>> {
        self.check_state(s)?;
        (0..event.n_patterns())
            .map(|v| {
                let r = event.pattern(v);
                let part = s.project(&r)?;
                Ok((r, part))
            })
            .collect()
    }
}
