//! Deterministic single-branch evolution of small qubit universes.
//!
//! A register of system and environment-record qubits evolves under a
//! diagonal free Hamiltonian punctuated by scheduled splitting events. The
//! state at the horizon splits into orthogonal branches, one per history of
//! event results. Evolving each branch back to time 0 gives an ensemble of
//! initial states; drawing one of them with probability equal to its norm²
//! and evolving it forward reproduces exactly that history, and the draw
//! probabilities coincide with the Born-rule weights of the same sequence of
//! observations.
//!
//! Modules, bottom-up:
//!
//! * [`statevec`]: dense amplitudes, local unitaries, diagonal phases, projectors
//! * [`schedule`]: system description, event timeline, windowed evolution
//! * [`branching`]: histories, branch decomposition, history operators, Born weights
//! * [`ensemble`]: backward-evolved initial states, seeded sampling, forward replay
//! * [`experiments`]: the two-event spin toy model and the Bell correlation setup
//! * [`verify`]: randomized schedules and the equivalence checks run on them
//! * [`config`]: the schedule file format

pub mod branching;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod schedule;
pub mod statevec;
pub mod verify;

pub use branching::{Branch, History};
pub use ensemble::{EnsembleEntry, ReplayReport};
pub use error::{Error, Result};
pub use experiments::{BellConfig, CorrelationResult};
pub use num_complex::Complex64;
pub use schedule::{EventFrame, EventSchedule, RecordQubit, SplittingEvent, SystemSpec, Violation};
pub use statevec::{BitAssignment, StateVector, UnitaryMatrix, MAX_QUBITS, TOL_NORM, TOL_UNITARY};
