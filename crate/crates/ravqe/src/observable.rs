//! Pauli-string observables and the XXZ chain Hamiltonian.
//!
//! An [`Observable`] is a real-weighted sum of Pauli strings. Expectation
//! values are evaluated term by term in O(terms * 2^n); the dense matrix
//! representation is materialized only inside [`Observable::exact_ground_energy`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::bit_of;
use crate::state::StateVector;

/// Dense diagonalization ceiling: larger systems are an error, not a fallback.
pub const DENSE_QUBIT_LIMIT: usize = 14;

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One real-weighted Pauli string, e.g. `0.5 * X_2 Z_4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    #[serde(rename = "coeff")]
    pub coefficient: f64,
    /// `(site, axis)` factors; sites are pairwise distinct.
    #[serde(rename = "paulis")]
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: Vec<(usize, Axis)>) -> Self {
        Self { coefficient, factors }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if !self.coefficient.is_finite() {
            return Err(Error::NonFiniteCoefficient { value: self.coefficient });
        }
        let mut seen = vec![false; n_qubits];
        for &(site, _) in &self.factors {
            if site >= n_qubits {
                return Err(Error::SiteOutOfRange { site, n: n_qubits });
            }
            if seen[site] {
                return Err(Error::DuplicateSite { site });
            }
            seen[site] = true;
        }
        Ok(())
    }

    /// Bit masks describing the string's action on a basis index:
    /// `flip` collects X/Y sites, `phase_mask` collects Y/Z sites, and the
    /// overall prefactor is `i^(#Y)`.
    fn masks(&self, n_qubits: usize) -> (usize, usize, Complex64) {
        let mut flip = 0usize;
        let mut phase_mask = 0usize;
        let mut y_count = 0u32;
        for &(site, axis) in &self.factors {
            let m = 1usize << bit_of(n_qubits, site);
            match axis {
                Axis::X => flip |= m,
                Axis::Y => {
                    flip |= m;
                    phase_mask |= m;
                    y_count += 1;
                }
                Axis::Z => phase_mask |= m,
            }
        }
        let i_pow = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (flip, phase_mask, i_pow)
    }
}

/// A Hermitian observable: a list of [`PauliTerm`]s on `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    #[serde(rename = "n")]
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for term in &terms {
            term.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// The antiferromagnetic XXZ chain with periodic boundary conditions:
    /// for every bond `(i, i+1 mod n)` the terms `X_i X_{i+1}`, `Y_i Y_{i+1}`
    /// with unit weight and `Z_i Z_{i+1}` with weight `jz`.
    pub fn xxz_chain(n: usize, jz: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidQubitCount {
                n,
                reason: "the periodic XXZ chain needs an even qubit count of at least 4",
            });
        }
        if !jz.is_finite() {
            return Err(Error::NonFiniteCoefficient { value: jz });
        }
        let mut terms = Vec::with_capacity(3 * n);
        for i in 0..n {
            let j = (i + 1) % n;
            terms.push(PauliTerm::new(1.0, vec![(i, Axis::X), (j, Axis::X)]));
            terms.push(PauliTerm::new(1.0, vec![(i, Axis::Y), (j, Axis::Y)]));
            terms.push(PauliTerm::new(jz, vec![(i, Axis::Z), (j, Axis::Z)]));
        }
        Ok(Self { n_qubits: n, terms })
    }

    /// `<psi| O |psi>` evaluated term-wise. The state must be normalized and
    /// match the observable's qubit count; the imaginary residue must stay
    /// below 1e-10 and is discarded.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        let deviation = (state.norm() - 1.0).abs();
        if deviation > 1e-8 {
            return Err(Error::NotNormalized { deviation });
        }
        let value = self.raw_expectation(state.amplitudes());
        if value.im.abs() >= 1e-10 {
            return Err(Error::ImaginaryResidue { residue: value.im.abs() });
        }
        Ok(value.re)
    }

    /// Term-wise `<psi|O|psi>` on a raw amplitude slice, without the
    /// normalization gate. Used internally by gradient sweeps.
    pub(crate) fn raw_expectation(&self, amps: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let (flip, phase_mask, i_pow) = term.masks(self.n_qubits);
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, &a) in amps.iter().enumerate() {
                let sign = if (b & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += amps[b ^ flip].conj() * (sign * a);
            }
            total += term.coefficient * i_pow * acc;
        }
        total
    }

    /// `O |psi>` accumulated into `dst` (overwritten). `dst` is in general not
    /// normalized.
    pub(crate) fn apply_into(&self, src: &[Complex64], dst: &mut [Complex64]) {
        dst.fill(Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let (flip, phase_mask, i_pow) = term.masks(self.n_qubits);
            let w = term.coefficient * i_pow;
            for (b, &a) in src.iter().enumerate() {
                let sign = if (b & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                dst[b ^ flip] += w * (sign * a);
            }
        }
    }

    /// Minimum eigenvalue of the dense Hermitian matrix representation.
    ///
    /// Only valid up to [`DENSE_QUBIT_LIMIT`] qubits; the 2^n x 2^n
    /// eigenproblem is solved with a Hermitian eigendecomposition.
    pub fn exact_ground_energy(&self) -> Result<f64> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::TooManyQubits { n: self.n_qubits, max: DENSE_QUBIT_LIMIT });
        }
        let m = self.dense_matrix();
        let eigen = nalgebra::SymmetricEigen::new(m);
        Ok(eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    fn dense_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let (flip, phase_mask, i_pow) = term.masks(self.n_qubits);
            let w = term.coefficient * i_pow;
            for col in 0..dim {
                let sign = if (col & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(col ^ flip, col)] += w * sign;
            }
        }
        m
    }
}
