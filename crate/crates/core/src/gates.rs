//! Named recording gates.
//!
//! Every gate here acts on three qubits `(spin, first record, second record)`.
//! A spin found in the "up" state of the chosen measurement basis toggles the
//! second record qubit; a spin in the "down" state toggles the first one:
//!
//! ```text
//! U = |up><up| ⊗ (I ⊗ X) + |down><down| ⊗ (X ⊗ I)
//! ```
//!
//! With the z basis this is the toy-model `U_1`; swapping in the x basis or a
//! basis rotated by θ toward x gives the `U_2` variants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::{StateVector, UnitaryMatrix};

/// Gate names accepted in schedule files.
pub const CATALOG: [&str; 3] = ["U1_z", "U2_x", "U2_theta"];

/// Spin state as `(amplitude of up, amplitude of down)` in the z basis.
pub type Spinor = [Complex64; 2];

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn z_basis() -> (Spinor, Spinor) {
    ([real(1.0), real(0.0)], [real(0.0), real(1.0)])
}

/// `|up>_x = (|up> + |down>)/√2`, `|down>_x = (|up> - |down>)/√2`.
pub fn x_basis() -> (Spinor, Spinor) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ([real(h), real(h)], [real(h), real(-h)])
}

/// `|up>_θ = cos(θ/2)|up> + sin(θ/2)|down>`, `|down>_θ = -sin(θ/2)|up> + cos(θ/2)|down>`.
pub fn theta_basis(theta: f64) -> (Spinor, Spinor) {
    let (s, c) = (theta / 2.0).sin_cos();
    ([real(c), real(s)], [real(-s), real(c)])
}

/// Recording unitary for an orthonormal `(up, down)` spin basis.
pub fn recorder(up: Spinor, down: Spinor) -> Result<UnitaryMatrix> {
    let mut entries = vec![Complex64::new(0.0, 0.0); 64];
    // local index = spin*4 + first*2 + second
    for (basis, flip) in [(up, 0b01usize), (down, 0b10usize)] {
        for s_row in 0..2 {
            for s_col in 0..2 {
                let p = basis[s_row] * basis[s_col].conj();
                for rec in 0..4usize {
                    let row = s_row * 4 + (rec ^ flip);
                    let col = s_col * 4 + rec;
                    entries[row * 8 + col] += p;
                }
            }
        }
    }
    UnitaryMatrix::new(8, entries)
}

/// Toy-model `U_1`: z spin recorded on `(e_0, e_1)`.
pub fn u1_z() -> UnitaryMatrix {
    let (up, down) = z_basis();
    recorder(up, down).expect("z basis is orthonormal")
}

/// Toy-model `U_2`: x spin recorded on `(e_2, e_3)`.
pub fn u2_x() -> UnitaryMatrix {
    let (up, down) = x_basis();
    recorder(up, down).expect("x basis is orthonormal")
}

/// Bell-experiment `U_2`: spin along a direction rotated by `theta` from z toward x.
pub fn u2_theta(theta: f64) -> UnitaryMatrix {
    let (up, down) = theta_basis(theta);
    recorder(up, down).expect("rotated basis is orthonormal")
}

/// Product of gates applied in order, each on its own positions of an
/// `n_qubits` local register, as one matrix on that register.
pub fn compose(n_qubits: usize, ops: &[(&UnitaryMatrix, &[usize])]) -> Result<UnitaryMatrix> {
    let dim = 1usize << n_qubits;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut column = StateVector::basis(n_qubits, col)?;
        for (u, targets) in ops {
            column = column.apply_local_unitary(u, targets)?;
        }
        for (row, amp) in column.amplitudes().iter().enumerate() {
            entries[row * dim + col] = *amp;
        }
    }
    UnitaryMatrix::new_unchecked(dim, entries)
}

/// Resolves a catalog name. `U2_theta` requires an angle.
pub fn by_name(name: &str, theta: Option<f64>) -> Result<UnitaryMatrix> {
    match (name, theta) {
        ("U1_z", None) => Ok(u1_z()),
        ("U2_x", None) => Ok(u2_x()),
        ("U2_theta", Some(t)) if t.is_finite() => Ok(u2_theta(t)),
        ("U2_theta", _) => Err(Error::InvalidArgument("U2_theta needs a finite theta".into())),
        (n, Some(_)) if CATALOG.contains(&n) => {
            Err(Error::InvalidArgument(format!("gate {n} takes no angle")))
        }
        (n, _) => Err(Error::InvalidArgument(format!("unknown gate {n:?}"))),
    }
}
