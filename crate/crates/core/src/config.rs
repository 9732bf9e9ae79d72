//! Schedule files.
//!
//! A schedule file is TOML:
//!
//! ```toml
//! n_qubits = 5
//! horizon = 3.0
//! frame = "memory"          # optional: "memory" (default) or "lab"
//! initial = { basis = "00000" }   # or { amplitudes = [[re, im], ...] }
//!
//! [[records]]
//! qubit = 1
//! omega = 1.0
//!
//! [[events]]
//! time = 1.0
//! gate = "U1_z"             # U1_z, U2_x, U2_theta (needs `theta`), explicit
//! targets = [0, 1, 2]
//! records = [1, 2]
//! # gate = "explicit" takes `matrix`: one list per row of [re, im] pairs
//! ```
//!
//! Amplitude and matrix indices follow the register convention: the first
//! qubit (or first target) is the most significant bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::Error;
use crate::gates;
use crate::schedule::{EventFrame, EventSchedule, RecordQubit, SplittingEvent, SystemSpec};
use crate::statevec::{StateVector, UnitaryMatrix};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("event {index}: {message}")]
    Event { index: usize, message: String },
    #[error("initial state: {0}")]
    Initial(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("cannot serialize schedule: {0}")]
    Serialize(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub time: f64,
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    pub targets: Vec<usize>,
    pub records: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub n_qubits: usize,
    pub horizon: f64,
    #[serde(default)]
    pub frame: EventFrame,
    pub initial: InitialSpec,
    #[serde(default)]
    pub records: Vec<RecordQubit>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl ScheduleFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Serialize(e.to_string()))
    }

    /// Fully explicit description: every gate as a matrix, the initial state
    /// as amplitudes.
    pub fn from_model(psi0: &StateVector, schedule: &EventSchedule) -> Self {
        let events = schedule
            .events()
            .iter()
            .map(|ev| {
                let d = ev.unitary.dim();
                EventSpec {
                    time: ev.time,
                    gate: "explicit".into(),
                    theta: None,
                    matrix: Some((0..d).map(|r| ev.unitary.row(r).iter().copied().map(pair).collect()).collect()),
                    targets: ev.targets.clone(),
                    records: ev.record_set.clone(),
                }
            })
            .collect();
        Self {
            n_qubits: schedule.n_qubits(),
            horizon: schedule.horizon(),
            frame: schedule.frame(),
            initial: InitialSpec {
                basis: None,
                amplitudes: Some(psi0.amplitudes().iter().copied().map(pair).collect()),
            },
            records: schedule.spec().records.clone(),
            events,
        }
    }

    fn initial_state(&self) -> Result<StateVector, ConfigError> {
        let state = match (&self.initial.basis, &self.initial.amplitudes) {
            (Some(bits), None) => {
                if bits.chars().count() != self.n_qubits {
                    return Err(ConfigError::Initial(format!(
                        "basis string {bits:?} has {} bits, expected {}",
                        bits.chars().count(),
                        self.n_qubits
                    )));
                }
                StateVector::from_bits(bits).map_err(|e| ConfigError::Initial(e.to_string()))?
            }
            (None, Some(amps)) => StateVector::from_amplitudes(self.n_qubits, amps.iter().copied().map(complex).collect())
                .map_err(|e| ConfigError::Initial(e.to_string()))?,
            _ => return Err(ConfigError::Initial("give exactly one of `basis` or `amplitudes`".into())),
        };
        if !state.is_normalized() {
            return Err(ConfigError::Initial(format!("norm² is {}, expected 1", state.norm_sqr())));
        }
        Ok(state)
    }

    fn event(&self, index: usize, spec: &EventSpec) -> Result<SplittingEvent, ConfigError> {
        let fail = |message: String| ConfigError::Event { index, message };
        let unitary = match (spec.gate.as_str(), &spec.matrix) {
            ("explicit", Some(rows)) => {
                let expected = 1usize.checked_shl(spec.targets.len() as u32).unwrap_or(0);
                if rows.len() != expected {
                    return Err(fail(format!("matrix has {} rows, {} targets need {expected}", rows.len(), spec.targets.len())));
                }
                if let Some(bad) = rows.iter().position(|r| r.len() != expected) {
                    return Err(fail(format!(
                        "malformed matrix row {bad}: {} entries, expected {expected}",
                        rows[bad].len()
                    )));
                }
                let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().copied().map(complex).collect()).collect();
                UnitaryMatrix::from_rows(&rows).map_err(|e| fail(e.to_string()))?
            }
            ("explicit", None) => return Err(fail("explicit gate without `matrix`".into())),
            (_, Some(_)) => return Err(fail(format!("gate {} does not take a matrix", spec.gate))),
            (name, None) => gates::by_name(name, spec.theta).map_err(|e| fail(e.to_string()))?,
        };
        Ok(SplittingEvent::new(spec.time, unitary, spec.targets.clone(), spec.records.clone()))
    }

    /// Resolves gates and the initial state and validates the schedule.
    pub fn build(&self) -> Result<(StateVector, EventSchedule), ConfigError> {
        let psi0 = self.initial_state()?;
        let events = self
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| self.event(i, e))
            .collect::<Result<Vec<_>, _>>()?;
        let schedule = EventSchedule::unchecked(SystemSpec::new(self.n_qubits, self.records.clone()), events, self.horizon)
            .with_frame(self.frame)
            .checked()?;
        Ok((psi0, schedule))
    }
}

/// Parses and validates a schedule file.
pub fn parse_schedule(text: &str) -> Result<(StateVector, EventSchedule), ConfigError> {
    ScheduleFile::from_toml(text)?.build()
}

/// SHA-256 of the canonical explicit form; equal for a named-gate file and the
/// builder that produces the same matrices.
pub fn schedule_hash(psi0: &StateVector, schedule: &EventSchedule) -> String {
    let canonical = serde_json::to_vec(&ScheduleFile::from_model(psi0, schedule)).expect("plain data serializes");
    hex::encode(Sha256::digest(&canonical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::build_toy;

    const TOY: &str = r#"
n_qubits = 5
horizon = 3.0
initial = { basis = "00000" }

[[records]]
qubit = 1
omega = 1.0
[[records]]
qubit = 2
omega = 1.4142135623730951
[[records]]
qubit = 3
omega = 1.7320508075688772
[[records]]
qubit = 4
omega = 2.23606797749979

[[events]]
time = 1.0
gate = "U1_z"
targets = [0, 1, 2]
records = [1, 2]

[[events]]
time = 2.0
gate = "U2_x"
targets = [0, 3, 4]
records = [3, 4]
"#;

    #[test]
    fn toy_file_matches_builder() {
        let (psi0, schedule) = parse_schedule(TOY).unwrap();
        let (b_psi0, b_schedule) = build_toy();
        assert_eq!(psi0, b_psi0);
        assert_eq!(schedule.events(), b_schedule.events());
        assert_eq!(schedule.spec(), b_schedule.spec());
        assert_eq!(schedule_hash(&psi0, &schedule), schedule_hash(&b_psi0, &b_schedule));
    }

    #[test]
    fn explicit_form_round_trips() {
        let (psi0, schedule) = build_toy();
        let text = ScheduleFile::from_model(&psi0, &schedule).to_toml().unwrap();
        let (p2, s2) = parse_schedule(&text).unwrap();
        assert_eq!(p2, psi0);
        assert_eq!(s2.events(), schedule.events());
        assert_eq!(s2.horizon(), schedule.horizon());
    }

    #[test]
    fn malformed_row_names_event() {
        let text = r#"
n_qubits = 2
horizon = 1.0
initial = { basis = "00" }
[[records]]
qubit = 1
omega = 1.0
[[events]]
time = 0.5
gate = "explicit"
targets = [0, 1]
records = [1]
matrix = [[[1,0],[0,0],[0,0],[0,0]], [[0,0],[1,0],[0,0],[0,0]], [[0,0],[0,0],[0,0]], [[0,0],[0,0],[1,0],[0,0]]]
"#;
        let err = parse_schedule(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("event 0") && msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_line_context() {
        let err = parse_schedule("n_qubits = 2\nhorizon = \n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn validation_failures_surface() {
        let text = TOY.replace("records = [3, 4]", "records = [2, 4]").replace("targets = [0, 3, 4]", "targets = [0, 2, 4]");
        let err = parse_schedule(&text).unwrap_err();
        assert!(err.to_string().contains("record sets not disjoint"), "{err}");
    }

    #[test]
    fn initial_state_checks() {
        assert!(parse_schedule(&TOY.replace("\"00000\"", "\"0000\"")).is_err());
        let no_events = "n_qubits = 1\nhorizon = 1.0\ninitial = { amplitudes = [[0.6, 0.0], [0.0, 0.8]] }\n";
        let (psi0, s) = parse_schedule(no_events).unwrap();
        assert!(s.events().is_empty());
        assert!((psi0.amplitude(1).im - 0.8).abs() < 1e-15);
        let unnormalized = no_events.replace("0.8", "0.9");
        assert!(matches!(parse_schedule(&unnormalized), Err(ConfigError::Initial(_))));
    }

    #[test]
    fn lab_frame_flag() {
        let text = format!("frame = \"lab\"\n{TOY}");
        let (_, s) = parse_schedule(&text).unwrap();
        assert_eq!(s.frame(), EventFrame::Lab);
    }
}
