use thiserror::Error;

use crate::schedule::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register must hold at least one qubit")]
    EmptyRegister,

    #[error("{requested} qubits exceeds the configured maximum of {max}")]
    Capacity { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("basis index {index} out of range for {n_qubits} qubits")]
    InvalidBasisIndex { index: usize, n_qubits: usize },

    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    InvalidQubit { qubit: usize, n_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("invalid character {0:?} in bit string")]
    BadBitString(char),

    #[error("bit value {0} is not 0 or 1")]
    BadBit(u8),

    #[error("matrix row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("matrix is not unitary (max |U†U - I| entry {0:.3e})")]
    NotUnitary(f64),

    #[error("cannot normalize the zero vector")]
    ZeroNorm,

    #[error("schedule invalid: {}", join_violations(.0))]
    InvalidSchedule(Vec<Violation>),

    #[error("{count} histories exceeds the enumeration limit of {max}")]
    TooManyHistories { count: u128, max: usize },

    #[error("history does not match the schedule's events")]
    HistoryShape,

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("ensemble weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),

    #[error("angle {0} outside [0, 2π)")]
    InvalidAngle(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
