//! Dense complex statevector backend.
//!
//! Qubit 0 is the most significant bit of the amplitude index. Gates are
//! applied in place with stride-pair updates; global phase is never
//! normalized away.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{bit_of, rotate_two_pauli};
use crate::layout::{ActivationMask, CircuitLayout, ParameterVector};
use crate::observable::Axis;

/// A pure `n`-qubit state as 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Chain of singlets `(|01> - |10>)/sqrt(2)` on qubit pairs
    /// `(0,1), (2,3), ...`.
    pub fn singlet_chain(n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidQubitCount { n, reason: "singlet pairing needs an even qubit count" });
        }
        let dim = 1usize << n;
        let scale = 2f64.sqrt().recip().powi((n / 2) as i32);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        'outer: for (b, a) in amps.iter_mut().enumerate() {
            let mut sign = 1.0;
            for pair in 0..n / 2 {
                let hi = (b >> bit_of(n, 2 * pair)) & 1;
                let lo = (b >> bit_of(n, 2 * pair + 1)) & 1;
                match (hi, lo) {
                    (0, 1) => {}
                    (1, 0) => sign = -sign,
                    _ => continue 'outer,
                }
            }
            *a = Complex64::new(sign * scale, 0.0);
        }
        Ok(Self { n_qubits: n, amps })
    }

    /// Basis state `|index>` with qubit 0 as the most significant bit.
    pub fn computational_basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQubitCount { n, reason: "need at least one qubit" });
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::SiteOutOfRange { site: index, n: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Build from explicit amplitudes; the vector must have length 2^n and be
    /// normalized to 1e-8.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQubitCount { n, reason: "need at least one qubit" });
        }
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch { expected: 1usize << n, got: amps.len() });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let deviation = (norm - 1.0).abs();
        if deviation > 1e-8 {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.amps.len(), got: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Apply `exp(i * theta * sigma_i sigma_j)` in place.
    pub fn apply_two_pauli_rotation(&mut self, axis: Axis, i: usize, j: usize, theta: f64) -> Result<()> {
        self.check_sites(i, j)?;
        rotate_two_pauli(&mut self.amps, self.n_qubits, axis, i, j, theta);
        Ok(())
    }

    /// Apply a full circuit: slots in layout order, inactive slots skipped
    /// entirely (their parameters are pinned to zero by the scheduler
    /// contract, so skipping equals applying the identity).
    pub fn apply_circuit(
        &mut self,
        layout: &CircuitLayout,
        params: &ParameterVector,
        mask: &ActivationMask,
    ) -> Result<()> {
        let p = layout.slot_count();
        if params.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: params.len() });
        }
        if mask.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: mask.len() });
        }
        if layout.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: layout.n_qubits(), got: self.n_qubits });
        }
        for slot in layout.slots() {
            if !mask.is_active(slot.flat_index) {
                continue;
            }
            let (i, j) = slot.bond;
            rotate_two_pauli(&mut self.amps, self.n_qubits, slot.axis, i, j, params[slot.flat_index]);
        }
        Ok(())
    }

    /// Von Neumann entropy, in bits, of the reduced state on qubits
    /// `[0, cut)`, from the eigenvalues of the 2^cut x 2^cut reduced density
    /// matrix. Eigenvalues below 1e-12 contribute zero.
    pub fn entanglement_entropy(&self, cut: usize) -> Result<f64> {
        if cut == 0 || cut >= self.n_qubits {
            return Err(Error::CutOutOfRange { cut, n: self.n_qubits });
        }
        let rows = 1usize << cut;
        let cols = 1usize << (self.n_qubits - cut);
        // rho_A = M M^dagger with M the amplitude reshape (row = first `cut` qubits)
        let mut rho = nalgebra::DMatrix::from_element(rows, rows, Complex64::new(0.0, 0.0));
        for r in 0..rows {
            for r2 in r..rows {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..cols {
                    acc += self.amps[r * cols + c] * self.amps[r2 * cols + c].conj();
                }
                rho[(r, r2)] = acc;
                rho[(r2, r)] = acc.conj();
            }
        }
        let eigen = nalgebra::SymmetricEigen::new(rho);
        let mut entropy = 0.0;
        for &lambda in eigen.eigenvalues.iter() {
            if lambda > 1e-12 {
                entropy -= lambda * lambda.log2();
            }
        }
        Ok(entropy)
    }

    fn check_sites(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::DuplicateSite { site: i });
        }
        for site in [i, j] {
            if site >= self.n_qubits {
                return Err(Error::SiteOutOfRange { site, n: self.n_qubits });
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn random_for_test(n: usize, rng: &mut impl rand::Rng) -> Self {
        let dim = 1usize << n;
        let mut amps: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Self { n_qubits: n, amps }
    }

    #[cfg(test)]
    pub(crate) fn scale_for_test(&mut self, factor: f64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }
}
