//! Dense state vectors over the computational basis of `n` qubits and the
//! handful of linear-algebra primitives the rest of the crate is built on.
//!
//! Index convention: qubit 0 is the most significant bit of an amplitude
//! index, so for three qubits `|q0 q1 q2>` lives at `q0*4 + q1*2 + q2`.
//! The same convention is used inside a [`UnitaryMatrix`]: the first entry of
//! the target list is the most significant bit of the matrix index.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register a [`StateVector`] may span unless a caller asks otherwise.
pub const MAX_QUBITS: usize = 24;

/// Norm tolerance for states designated normalized.
pub const TOL_NORM: f64 = 1e-10;

/// Per-entry tolerance on `U†U - I`.
pub const TOL_UNITARY: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit position of `qubit` inside an amplitude index of an `n`-qubit register.
#[inline]
pub(crate) fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

/// Amplitudes of an `n`-qubit pure state, possibly sub-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero vector.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits, MAX_QUBITS)?;
        Ok(Self {
            n_qubits,
            amplitudes: vec![ZERO; 1 << n_qubits],
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::InvalidBasisIndex { index, n_qubits });
        }
        s.amplitudes[index] = ONE;
        Ok(s)
    }

    /// Basis state from a bit string such as `"01001"`, qubit 0 first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.chars().count();
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                other => return Err(Error::BadBitString(other)),
            }
        }
        Self::basis(n, index)
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(n_qubits, MAX_QUBITS)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state whose length determines the qubit count.
    pub fn from_vec(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        Self::from_amplitudes(len.trailing_zeros() as usize, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `‖ψ‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < TOL_NORM
    }

    /// Unit-norm copy. The zero vector cannot be normalized.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Amplitude-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest `|a_i - b_i|` over all amplitudes.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `Σ conj(self_i) · other_i`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`, with `self` occupying the leading (most significant) qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_bounded(other, MAX_QUBITS)
    }

    pub fn tensor_bounded(&self, other: &Self, max_qubits: usize) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity(n, max_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Applies `u` to the ordered `targets`, identity elsewhere.
    pub fn apply_local_unitary(&self, u: &UnitaryMatrix, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_local_in_place(u, targets)?;
        Ok(out)
    }

    pub(crate) fn apply_local_in_place(&mut self, u: &UnitaryMatrix, targets: &[usize]) -> Result<()> {
        check_targets(self.n_qubits, targets)?;
        let k = targets.len();
        if u.dim() != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                found: u.dim(),
            });
        }
        let n = self.n_qubits;
        // offsets[j] is the register index contribution of local index j
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|j| {
                targets.iter().enumerate().fold(0, |acc, (m, &q)| {
                    if j >> (k - 1 - m) & 1 == 1 {
                        acc | 1 << bit_of(n, q)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let target_mask = offsets[offsets.len() - 1];
        let mut local = vec![ZERO; 1 << k];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (slot, off) in local.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let r = u.row(row);
                let mut acc = ZERO;
                for (coef, v) in r.iter().zip(&local) {
                    acc += coef * v;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Multiplies each basis amplitude by `exp(-i dt Σ ω_q b_q)`, the sum running
    /// over the `(qubit, ω)` pairs and `b_q` the basis state's bit on that qubit.
    pub fn evolve_diagonal(&self, frequencies: &[(usize, f64)], dt: f64) -> Result<Self> {
        let mut out = self.clone();
        out.evolve_diagonal_in_place(frequencies, dt)?;
        Ok(out)
    }

    pub(crate) fn evolve_diagonal_in_place(&mut self, frequencies: &[(usize, f64)], dt: f64) -> Result<()> {
        let qubits: Vec<usize> = frequencies.iter().map(|&(q, _)| q).collect();
        check_targets(self.n_qubits, &qubits)?;
        if dt == 0.0 || frequencies.is_empty() {
            return Ok(());
        }
        let n = self.n_qubits;
        let masks: Vec<(usize, f64)> = frequencies
            .iter()
            .map(|&(q, w)| (1 << bit_of(n, q), w))
            .collect();
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let energy: f64 = masks
                .iter()
                .filter(|(m, _)| index & m != 0)
                .map(|(_, w)| w)
                .sum();
            if energy != 0.0 {
                *amp *= Complex64::from_polar(1.0, -dt * energy);
            }
        }
        Ok(())
    }

    /// Keeps the amplitudes whose bits agree with `r`, zeroing the rest.
    pub fn project(&self, r: &BitAssignment) -> Result<Self> {
        let mut out = self.clone();
        out.project_in_place(r)?;
        Ok(out)
    }

    pub(crate) fn project_in_place(&mut self, r: &BitAssignment) -> Result<()> {
        let (mask, value) = r.mask_value(self.n_qubits)?;
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            if index & mask != value {
                *amp = ZERO;
            }
        }
        Ok(())
    }

    /// `‖P(r) ψ‖²` without materializing the projection.
    pub fn pattern_norm_sqr(&self, r: &BitAssignment) -> Result<f64> {
        let (mask, value) = r.mask_value(self.n_qubits)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == value)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn check_capacity(n_qubits: usize, max: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::EmptyRegister);
    }
    if n_qubits > max {
        return Err(Error::Capacity {
            requested: n_qubits,
            max,
        });
    }
    Ok(())
}

pub(crate) fn check_targets(n_qubits: usize, targets: &[usize]) -> Result<()> {
    for (i, &q) in targets.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::InvalidQubit { qubit: q, n_qubits });
        }
        if targets[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Dense square complex matrix acting on `log2(dim)` qubits, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Checks shape and `U†U = I` to [`TOL_UNITARY`] per entry.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let u = Self::new_unchecked(dim, entries)?;
        let dev = u.unitarity_deviation();
        if dev > TOL_UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        Ok(u)
    }

    /// Shape checks only. Used for products of matrices already known to be
    /// unitary, where rounding may exceed the strict per-entry tolerance.
    pub fn new_unchecked(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::RaggedRow {
                row: bad,
                expected: dim,
                found: rows[bad].len(),
            });
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self::new_unchecked(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * other.entries[k * d + c];
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut entries = vec![ZERO; d * d];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.entries[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        entries[(r1 * b + r2) * d + c1 * b + c2] = x * other.entries[r2 * b + c2];
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    /// `D · U · D†` for a diagonal `D` given by its entries.
    pub fn conjugate_by_diagonal(&self, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: diag.len(),
            });
        }
        let d = self.dim;
        let mut entries = self.entries.clone();
        for r in 0..d {
            for c in 0..d {
                entries[r * d + c] *= diag[r] * diag[c].conj();
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.entries[k * d + i].conj() * self.entries[k * d + j];
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Bit values on an ordered list of distinct qubits; labels a projector
/// subspace and a single event result.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitAssignment {
    qubits: Vec<usize>,
    bits: Vec<u8>,
}

impl BitAssignment {
    pub fn new(qubits: Vec<usize>, bits: Vec<u8>) -> Result<Self> {
        if qubits.len() != bits.len() {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                found: bits.len(),
            });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::BadBit(b));
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::DuplicateQubit(*q));
            }
        }
        Ok(Self { qubits, bits })
    }

    pub fn single(qubit: usize, bit: u8) -> Result<Self> {
        Self::new(vec![qubit], vec![bit])
    }

    /// Pattern number `value` on `qubits`, first qubit most significant.
    pub fn from_pattern(qubits: &[usize], value: usize) -> Self {
        let k = qubits.len();
        Self {
            qubits: qubits.to_vec(),
            bits: (0..k).map(|m| (value >> (k - 1 - m) & 1) as u8).collect(),
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Inverse of [`BitAssignment::from_pattern`].
    pub fn pattern(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
    }

    /// `(mask, value)` such that an amplitude index `i` matches iff `i & mask == value`.
    pub fn mask_value(&self, n_qubits: usize) -> Result<(usize, usize)> {
        check_targets(n_qubits, &self.qubits)?;
        let mut mask = 0;
        let mut value = 0;
        for (&q, &b) in self.qubits.iter().zip(&self.bits) {
            let bit = 1 << bit_of(n_qubits, q);
            mask |= bit;
            if b == 1 {
                value |= bit;
            }
        }
        Ok((mask, value))
    }
}

impl fmt::Display for BitAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}
