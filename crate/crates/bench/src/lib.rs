//! Fixtures shared by the criterion benches.

use onebranch::ensemble::substream;
use onebranch::verify::{random_state, random_unitary};
use onebranch::{StateVector, UnitaryMatrix};

pub const FIXTURE_SEED: u64 = 7;

/// Haar-ish random state on `n` qubits and a random `k`-qubit unitary.
pub fn local_unitary_fixture(n: usize, k: usize) -> (StateVector, UnitaryMatrix) {
    let mut rng = substream(FIXTURE_SEED, n as u64);
    let psi = random_state(&mut rng, n).expect("state fixture");
    let u = random_unitary(&mut rng, 1 << k).expect("unitary fixture");
    (psi, u)
}
