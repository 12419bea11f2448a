//! Density-matrix backend with two-qubit depolarizing noise.
//!
//! The channel convention is the 15-Pauli Kraus form
//! `rho -> (1 - p) rho + (p/15) sum_{P != II} P rho P` on the gate's qubit
//! pair. Internally the sum is evaluated through its partial-trace identity
//! `sum_{all 16 P} P rho P = 16 (Tr_pair rho) (x) I/4`, which is the same
//! channel at a quarter of the arithmetic; the unit tests pin the literal
//! Kraus sum against it.
//!
//! Noise attaches only to ACTIVE gates: an unactivated slot is never
//! implemented, so it contributes neither a unitary nor a channel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gradient::{Gradient, ShiftGradient};
use crate::kernels::bit_of;
use crate::layout::{ActivationMask, CircuitLayout, ParameterVector};
use crate::observable::{Axis, Observable};
use crate::state::StateVector;

/// Dense density matrices above this qubit count are refused.
pub const DENSITY_QUBIT_LIMIT: usize = 10;

/// Gate and channel applications performed by one noisy energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NoisyEvalStats {
    pub gates_applied: usize,
    pub channels_applied: usize,
}

/// A mixed `n`-qubit state as a dense 2^n x 2^n matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    elements: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|psi><psi|` for the singlet chain.
    pub fn singlet_chain(n: usize) -> Result<Self> {
        if n > DENSITY_QUBIT_LIMIT {
            return Err(Error::TooManyQubits { n, max: DENSITY_QUBIT_LIMIT });
        }
        let psi = StateVector::singlet_chain(n)?;
        Ok(Self::from_pure(&psi))
    }

    /// Outer product of a pure state.
    pub fn from_pure(psi: &StateVector) -> Self {
        let amps = psi.amplitudes();
        let dim = amps.len();
        let mut elements = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                elements[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Self { n_qubits: psi.n_qubits(), elements }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|r| self.elements[r * dim + r]).sum()
    }

    /// `Tr(rho^2)`; 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let dim = self.dim();
        let mut acc = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                acc += (self.elements[r * dim + c] * self.elements[c * dim + r]).re;
            }
        }
        acc
    }

    /// Conjugate by `exp(i theta sigma_i sigma_j)`.
    ///
    /// Left multiplication mixes row pairs; right multiplication by the
    /// adjoint applies the -theta rotation to each (contiguous) row, using
    /// the symmetry of the gate matrix.
    pub fn apply_two_pauli_rotation(&mut self, axis: Axis, i: usize, j: usize, theta: f64) -> Result<()> {
        if i == j {
            return Err(Error::DuplicateSite { site: i });
        }
        for site in [i, j] {
            if site >= self.n_qubits {
                return Err(Error::SiteOutOfRange { site, n: self.n_qubits });
            }
        }
        let dim = self.dim();
        let n = self.n_qubits;
        let mi = 1usize << bit_of(n, i);
        let mj = 1usize << bit_of(n, j);
        let (c, s) = (theta.cos(), theta.sin());

        // U rho: mix rows
        match axis {
            Axis::Z => {
                let plus = Complex64::new(c, s);
                let minus = Complex64::new(c, -s);
                for r in 0..dim {
                    let equal = (r & mi == 0) == (r & mj == 0);
                    let f = if equal { plus } else { minus };
                    for e in &mut self.elements[r * dim..(r + 1) * dim] {
                        *e *= f;
                    }
                }
            }
            Axis::X | Axis::Y => {
                let is = Complex64::new(0.0, s);
                let flip = mi | mj;
                for r in 0..dim {
                    if r & mi != 0 {
                        continue;
                    }
                    let p = r ^ flip;
                    let sign = match axis {
                        Axis::X => 1.0,
                        Axis::Y => {
                            if r & mj == 0 {
                                -1.0
                            } else {
                                1.0
                            }
                        }
                        Axis::Z => unreachable!(),
                    };
                    for k in 0..dim {
                        let a = self.elements[r * dim + k];
                        let b = self.elements[p * dim + k];
                        self.elements[r * dim + k] = c * a + sign * is * b;
                        self.elements[p * dim + k] = c * b + sign * is * a;
                    }
                }
            }
        }

        // (U rho) U^dag: the gate matrix is symmetric, so each row transforms
        // like a state under the -theta rotation
        for r in 0..dim {
            crate::kernels::rotate_two_pauli(&mut self.elements[r * dim..(r + 1) * dim], n, axis, i, j, -theta);
        }
        Ok(())
    }

    /// Two-qubit depolarizing channel of strength `p_noise` on the pair
    /// `(i, j)`.
    pub fn depolarize_pair(&mut self, i: usize, j: usize, p_noise: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p_noise) {
            return Err(Error::NoiseStrengthOutOfRange { p: p_noise });
        }
        if i == j {
            return Err(Error::DuplicateSite { site: i });
        }
        for site in [i, j] {
            if site >= self.n_qubits {
                return Err(Error::SiteOutOfRange { site, n: self.n_qubits });
            }
        }
        if p_noise == 0.0 {
            return Ok(());
        }
        let dim = self.dim();
        let n = self.n_qubits;
        let bi = bit_of(n, i);
        let bj = bit_of(n, j);
        let pair_mask = (1usize << bi) | (1usize << bj);
        let keep = 1.0 - 16.0 * p_noise / 15.0;
        let mix = 16.0 * p_noise / 15.0 / 4.0;

        // partial trace over the pair, indexed by the remaining bits
        let rest = dim >> 2;
        let mut traced = vec![Complex64::new(0.0, 0.0); rest * rest];
        let embed = |packed: usize| -> usize {
            // spread the packed remaining bits around positions bi and bj
            let mut out = 0usize;
            let mut src = 0usize;
            for bit in 0..n {
                if (1usize << bit) & pair_mask != 0 {
                    continue;
                }
                out |= ((packed >> src) & 1) << bit;
                src += 1;
            }
            out
        };
        let embeds: Vec<usize> = (0..rest).map(embed).collect();
        let pair_values: Vec<usize> = {
            let mut v = vec![0usize; 4];
            for (k, val) in v.iter_mut().enumerate() {
                *val = (((k >> 1) & 1) << bi) | ((k & 1) << bj);
            }
            v
        };
        for (rr, &er) in embeds.iter().enumerate() {
            for (cc, &ec) in embeds.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &v in &pair_values {
                    acc += self.elements[(er | v) * dim + (ec | v)];
                }
                traced[rr * rest + cc] = acc;
            }
        }

        for e in &mut self.elements {
            *e *= keep;
        }
        for (rr, &er) in embeds.iter().enumerate() {
            for (cc, &ec) in embeds.iter().enumerate() {
                let t = mix * traced[rr * rest + cc];
                for &v in &pair_values {
                    self.elements[(er | v) * dim + (ec | v)] += t;
                }
            }
        }
        Ok(())
    }

    /// `Tr(rho O)`, term-wise in O(terms * 2^n).
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: obs.n_qubits() });
        }
        let value = trace_product_with_observable(&self.elements, self.n_qubits, obs);
        if value.im.abs() >= 1e-10 {
            return Err(Error::ImaginaryResidue { residue: value.im.abs() });
        }
        Ok(value.re)
    }

    /// Smallest eigenvalue; positivity means it stays above about -1e-9.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| self.elements[r * dim + c]);
        let eigen = nalgebra::SymmetricEigen::new(m);
        eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let d = (self.elements[r * dim + c] - self.elements[c * dim + r].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// `Tr(rho O)` for a raw row-major matrix.
fn trace_product_with_observable(elements: &[Complex64], n: usize, obs: &Observable) -> Complex64 {
    let dim = 1usize << n;
    let mut total = Complex64::new(0.0, 0.0);
    for term in obs.terms() {
        let (flip, phase_mask, i_pow) = term_masks(term, n);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            let sign = if (r & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * elements[r * dim + (r ^ flip)];
        }
        total += term.coefficient * i_pow * acc;
    }
    total
}

fn term_masks(term: &crate::observable::PauliTerm, n: usize) -> (usize, usize, Complex64) {
    let mut flip = 0usize;
    let mut phase_mask = 0usize;
    let mut y_count = 0u32;
    for &(site, axis) in &term.factors {
        let m = 1usize << bit_of(n, site);
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

/// `Tr(rho H)` after running the active gates (each followed by the
/// depolarizing channel on its pair) on the singlet chain.
pub fn noisy_energy(
    layout: &CircuitLayout,
    params: &ParameterVector,
    mask: &ActivationMask,
    obs: &Observable,
    p_noise: f64,
) -> Result<f64> {
    noisy_energy_with_stats(layout, params, mask, obs, p_noise).map(|(e, _)| e)
}

/// [`noisy_energy`] plus gate/channel application counts; the channel count
/// equals the number of active slots by construction.
pub fn noisy_energy_with_stats(
    layout: &CircuitLayout,
    params: &ParameterVector,
    mask: &ActivationMask,
    obs: &Observable,
    p_noise: f64,
) -> Result<(f64, NoisyEvalStats)> {
    let p = layout.slot_count();
    if params.len() != p || mask.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: params.len().min(mask.len()) });
    }
    let mut rho = DensityMatrix::singlet_chain(layout.n_qubits())?;
    let mut stats = NoisyEvalStats::default();
    for slot in layout.slots() {
        if !mask.is_active(slot.flat_index) {
            continue;
        }
        let (i, j) = slot.bond;
        rho.apply_two_pauli_rotation(slot.axis, i, j, params[slot.flat_index])?;
        rho.depolarize_pair(i, j, p_noise)?;
        stats.gates_applied += 1;
        stats.channels_applied += 1;
    }
    Ok((rho.expectation(obs)?, stats))
}

/// Parameter-shift gradient on the depolarizing backend.
///
/// Equal to evaluating `noisy_energy` at `theta_k +- pi/4` for every active
/// slot, computed with shared circuit prefixes and suffixes: a backward
/// Heisenberg sweep stores `G_k = Phi_k(H_k)` (the observable pulled back
/// through everything after gate k, then through gate k's own channel —
/// the depolarizing channel is self-adjoint), and a forward sweep then pays
/// one gate conjugation and one trace per shifted evaluation.
pub fn shift_gradient_noisy(
    layout: &CircuitLayout,
    params: &ParameterVector,
    mask: &ActivationMask,
    obs: &Observable,
    p_noise: f64,
) -> Result<ShiftGradient> {
    let p = layout.slot_count();
    if params.len() != p || mask.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: params.len().min(mask.len()) });
    }
    if obs.n_qubits() != layout.n_qubits() {
        return Err(Error::DimensionMismatch { expected: layout.n_qubits(), got: obs.n_qubits() });
    }
    let n = layout.n_qubits();
    if n > DENSITY_QUBIT_LIMIT {
        return Err(Error::TooManyQubits { n, max: DENSITY_QUBIT_LIMIT });
    }
    let dim = 1usize << n;
    let active: Vec<&crate::layout::GateSlot> =
        layout.slots().iter().filter(|s| mask.is_active(s.flat_index)).collect();

    // backward sweep: pull the observable back through the circuit
    let mut heisenberg = DensityMatrix { n_qubits: n, elements: dense_observable(obs) };
    let mut pulled_back: Vec<Vec<Complex64>> = vec![Vec::new(); active.len()];
    for (pos, slot) in active.iter().enumerate().rev() {
        let (i, j) = slot.bond;
        // channel first (self-adjoint), then the inverse unitary
        heisenberg.depolarize_pair(i, j, p_noise)?;
        pulled_back[pos] = heisenberg.elements.clone();
        heisenberg.apply_two_pauli_rotation(slot.axis, i, j, -params[slot.flat_index])?;
    }

    // forward sweep with two single-gate shifted evaluations per active slot
    let shift = std::f64::consts::FRAC_PI_4;
    let mut rho = DensityMatrix::singlet_chain(n)?;
    let mut grad = vec![0.0; p];
    let mut scratch = DensityMatrix { n_qubits: n, elements: vec![Complex64::new(0.0, 0.0); dim * dim] };
    let mut evaluations = 0u64;
    for (pos, slot) in active.iter().enumerate() {
        let (i, j) = slot.bond;
        let theta = params[slot.flat_index];
        let mut shifted_energy = [0.0; 2];
        for (side, delta) in [(0usize, shift), (1usize, -shift)] {
            scratch.elements.copy_from_slice(&rho.elements);
            scratch.apply_two_pauli_rotation(slot.axis, i, j, theta + delta)?;
            shifted_energy[side] = trace_pair(&scratch.elements, &pulled_back[pos], dim);
            evaluations += 1;
        }
        grad[slot.flat_index] = shifted_energy[0] - shifted_energy[1];
        rho.apply_two_pauli_rotation(slot.axis, i, j, theta)?;
        rho.depolarize_pair(i, j, p_noise)?;
    }
    let energy = rho.expectation(obs)?;
    Ok(ShiftGradient { energy, gradient: Gradient::from_values(grad), evaluations })
}

/// Dense matrix of an observable (row-major), for Heisenberg-picture sweeps.
fn dense_observable(obs: &Observable) -> Vec<Complex64> {
    let n = obs.n_qubits();
    let dim = 1usize << n;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for term in obs.terms() {
        let (flip, phase_mask, i_pow) = term_masks(term, n);
        let w = term.coefficient * i_pow;
        for col in 0..dim {
            let sign = if (col & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(col ^ flip) * dim + col] += w * sign;
        }
    }
    m
}

/// `Re Tr(A B)` for row-major square matrices.
fn trace_pair(a: &[Complex64], b: &[Complex64], dim: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            acc += (a[r * dim + c] * b[c * dim + r]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;
    use crate::gradient::parameter_shift_gradient;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_circuit(
        n: usize,
        l: usize,
        density: f64,
        rng: &mut ChaCha8Rng,
    ) -> (CircuitLayout, ParameterVector, ActivationMask) {
        let layout = CircuitLayout::build(n, l).unwrap();
        let p = layout.slot_count();
        let mut params = ParameterVector::zeros(p);
        let mut mask = ActivationMask::all_inactive(p);
        for idx in 0..p {
            if rng.gen_bool(density) {
                mask.activate(idx);
                params[idx] = rng.gen_range(0.0..std::f64::consts::TAU);
            }
        }
        (layout, params, mask)
    }

    /// Literal 15-Pauli Kraus sum, the independent oracle for the channel.
    fn depolarize_literal(rho: &DensityMatrix, i: usize, j: usize, p_noise: f64) -> DensityMatrix {
        let n = rho.n_qubits();
        let dim = rho.dim();
        let axes = [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)];
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (ai, axis_i) in axes.iter().enumerate() {
            for (aj, axis_j) in axes.iter().enumerate() {
                if ai == 0 && aj == 0 {
                    continue;
                }
                let mut factors = Vec::new();
                if let Some(a) = axis_i {
                    factors.push((i, *a));
                }
                if let Some(a) = axis_j {
                    factors.push((j, *a));
                }
                let obs =
                    Observable::new(n, vec![crate::observable::PauliTerm::new(1.0, factors)]).unwrap();
                let (flip, phase_mask, i_pow) = term_masks(&obs.terms()[0], n);
                // P rho P elementwise: rows and columns both permuted/phased
                for r in 0..dim {
                    let sr = if (r & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    for c in 0..dim {
                        let sc = if (c & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        // (P rho P)[r, c] = phase(r) * conj-phase(c) * rho[r^flip, c^flip]
                        let val = i_pow * sr * (i_pow * sc).conj() * rho.elements()[(r ^ flip) * dim + (c ^ flip)];
                        out[r * dim + c] += val;
                    }
                }
            }
        }
        let mut elements = vec![Complex64::new(0.0, 0.0); dim * dim];
        for idx in 0..dim * dim {
            elements[idx] = (1.0 - p_noise) * rho.elements()[idx] + p_noise / 15.0 * out[idx];
        }
        DensityMatrix { n_qubits: n, elements }
    }

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        // mixture of a few random pure states
        let dim = 1usize << n;
        let mut elements = vec![Complex64::new(0.0, 0.0); dim * dim];
        let weights = [0.5, 0.3, 0.2];
        for w in weights {
            let psi = StateVector::random_for_test(n, rng);
            for r in 0..dim {
                for c in 0..dim {
                    elements[r * dim + c] += w * psi.amplitudes()[r] * psi.amplitudes()[c].conj();
                }
            }
        }
        DensityMatrix { n_qubits: n, elements }
    }

    #[test]
    fn singlet_dm_matches_statevector_outer_product() {
        let rho = DensityMatrix::singlet_chain(2).unwrap();
        let psi = StateVector::singlet_chain(2).unwrap();
        let outer = DensityMatrix::from_pure(&psi);
        assert_eq!(rho, outer);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);

        let h = Observable::xxz_chain(4, 1.0).unwrap();
        let rho4 = DensityMatrix::singlet_chain(4).unwrap();
        assert_abs_diff_eq!(rho4.expectation(&h).unwrap(), -6.0, epsilon = 1e-12);
    }

    #[test]
    fn gate_conjugation_preserves_trace_and_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut rho = DensityMatrix::singlet_chain(4).unwrap();
        let before = rho.clone();
        rho.apply_two_pauli_rotation(Axis::Y, 0, 2, 0.0).unwrap();
        assert_eq!(rho, before, "theta = 0 leaves rho untouched");

        for _ in 0..30 {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
            let i = rng.gen_range(0..4);
            let mut j = rng.gen_range(0..4);
            while j == i {
                j = rng.gen_range(0..4);
            }
            rho.apply_two_pauli_rotation(axis, i, j, rng.gen_range(-3.0..3.0)).unwrap();
        }
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-10);
        assert!(rho.hermiticity_deviation() < 1e-10);
    }

    #[test]
    fn pure_state_evolution_matches_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut psi = StateVector::singlet_chain(4).unwrap();
        let mut rho = DensityMatrix::singlet_chain(4).unwrap();
        for _ in 0..20 {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
            let i = rng.gen_range(0..4);
            let mut j = rng.gen_range(0..4);
            while j == i {
                j = rng.gen_range(0..4);
            }
            let theta = rng.gen_range(-3.0..3.0);
            psi.apply_two_pauli_rotation(axis, i, j, theta).unwrap();
            rho.apply_two_pauli_rotation(axis, i, j, theta).unwrap();
        }
        let outer = DensityMatrix::from_pure(&psi);
        for (a, b) in rho.elements().iter().zip(outer.elements()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn depolarizing_reference_cases() {
        let mut rho = DensityMatrix::singlet_chain(4).unwrap();
        let before = rho.clone();
        rho.depolarize_pair(0, 1, 0.0).unwrap();
        assert_eq!(rho, before, "p = 0 is the identity channel");

        // maximally mixed input is a fixed point (the channel is unital)
        let dim = 4usize;
        let mut elements = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            elements[r * dim + r] = Complex64::new(0.25, 0.0);
        }
        let mut mixed = DensityMatrix { n_qubits: 2, elements: elements.clone() };
        mixed.depolarize_pair(0, 1, 0.7).unwrap();
        for (a, b) in mixed.elements().iter().zip(&elements) {
            assert!((a - b).norm() < 1e-14);
        }

        // p = 15/16 on a two-qubit pure state gives exactly I/4
        let psi = StateVector::computational_basis(2, 0).unwrap();
        let mut rho = DensityMatrix::from_pure(&psi);
        rho.depolarize_pair(0, 1, 15.0 / 16.0).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r == c { 0.25 } else { 0.0 };
                assert!((rho.elements()[r * 4 + c] - Complex64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn channel_matches_literal_kraus_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let rho = random_density(3, &mut rng);
            let p_noise = rng.gen_range(0.0..1.0);
            let i = rng.gen_range(0..3);
            let mut j = rng.gen_range(0..3);
            while j == i {
                j = rng.gen_range(0..3);
            }
            let literal = depolarize_literal(&rho, i, j, p_noise);
            let mut fast = rho.clone();
            fast.depolarize_pair(i, j, p_noise).unwrap();
            for (a, b) in fast.elements().iter().zip(literal.elements()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_is_cptp_under_random_applications() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut rho = DensityMatrix::singlet_chain(4).unwrap();
        for _ in 0..100 {
            let i = rng.gen_range(0..4);
            let mut j = rng.gen_range(0..4);
            while j == i {
                j = rng.gen_range(0..4);
            }
            if rng.gen_bool(0.5) {
                let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
                rho.apply_two_pauli_rotation(axis, i, j, rng.gen_range(-3.0..3.0)).unwrap();
            } else {
                rho.depolarize_pair(i, j, rng.gen_range(0.0..0.3)).unwrap();
            }
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.trace().im.abs() < 1e-12);
        }
        assert!(rho.min_eigenvalue() >= -1e-9);
        assert!(rho.hermiticity_deviation() < 1e-10);
    }

    #[test]
    fn depolarize_rejects_invalid_strength() {
        let mut rho = DensityMatrix::singlet_chain(2).unwrap();
        assert!(rho.depolarize_pair(0, 1, -0.1).is_err());
        assert!(rho.depolarize_pair(0, 1, 1.1).is_err());
    }

    #[test]
    fn noisy_energy_reference_behavior() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let (layout, params, mask) = random_circuit(4, 2, 0.7, &mut rng);
        let obs = Observable::xxz_chain(4, 1.0).unwrap();

        // channel off: equals the exact expectation
        let noiseless = Backend::Exact.energy(&layout, &params, &mask, &obs).unwrap();
        let zero_noise = noisy_energy(&layout, &params, &mask, &obs, 0.0).unwrap();
        assert_abs_diff_eq!(noiseless, zero_noise, epsilon = 1e-10);

        // all gates inactive: initial-state energy, no noise anywhere
        let empty_mask = ActivationMask::all_inactive(layout.slot_count());
        let zeros = ParameterVector::zeros(layout.slot_count());
        for p_noise in [0.0, 1e-3, 0.5] {
            let e = noisy_energy(&layout, &zeros, &empty_mask, &obs, p_noise).unwrap();
            assert_abs_diff_eq!(e, -6.0, epsilon = 1e-12);
        }

        // noise pulls the energy up toward the maximally mixed value
        // Tr(H)/2^n = 0; checked on circuits near the singlet minimum, where
        // the clean energy sits far below zero
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let layout = CircuitLayout::build(4, 2).unwrap();
            let p = layout.slot_count();
            let mut params = ParameterVector::zeros(p);
            for idx in 0..p {
                params[idx] = rng.gen_range(-0.15..0.15);
            }
            let mask = ActivationMask::all_active(p);
            let clean = Backend::Exact.energy(&layout, &params, &mask, &obs).unwrap();
            assert!(clean < -4.0, "perturbed singlet stays deep: {clean}");
            let noisy = noisy_energy(&layout, &params, &mask, &obs, 1e-3).unwrap();
            assert!(noisy > clean, "depolarizing contracts toward zero energy: {noisy} vs {clean}");
        }
    }

    #[test]
    fn channel_count_equals_active_gate_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for density in [0.0, 0.3, 1.0] {
            let (layout, params, mask) = random_circuit(4, 2, density, &mut rng);
            let obs = Observable::xxz_chain(4, 1.0).unwrap();
            let (_, stats) = noisy_energy_with_stats(&layout, &params, &mask, &obs, 1e-3).unwrap();
            assert_eq!(stats.channels_applied, mask.active_count());
            assert_eq!(stats.gates_applied, mask.active_count());
        }
    }

    #[test]
    fn shift_gradient_matches_finite_differences_of_noisy_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let (layout, params, mask) = random_circuit(4, 1, 0.6, &mut rng);
        let obs = Observable::xxz_chain(4, 1.0).unwrap();
        let p_noise = 1e-3;
        let shift = shift_gradient_noisy(&layout, &params, &mask, &obs, p_noise).unwrap();
        assert_eq!(shift.evaluations, 2 * mask.active_count() as u64);
        let step = 1e-4;
        let mut shifted = params.clone();
        for idx in mask.active_indices() {
            let theta = params[idx];
            shifted[idx] = theta + step;
            let plus = noisy_energy(&layout, &shifted, &mask, &obs, p_noise).unwrap();
            shifted[idx] = theta - step;
            let minus = noisy_energy(&layout, &shifted, &mask, &obs, p_noise).unwrap();
            shifted[idx] = theta;
            let fd = (plus - minus) / (2.0 * step);
            assert_abs_diff_eq!(shift.gradient.values()[idx], fd, epsilon = 1e-6);
        }
        // energy byproduct agrees with a direct evaluation
        let direct = noisy_energy(&layout, &params, &mask, &obs, p_noise).unwrap();
        assert_abs_diff_eq!(shift.energy, direct, epsilon = 1e-10);
    }

    #[test]
    fn shift_gradient_reduces_to_exact_backend_at_zero_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let (layout, params, mask) = random_circuit(4, 2, 0.5, &mut rng);
        let obs = Observable::xxz_chain(4, 0.5).unwrap();
        let noisy = shift_gradient_noisy(&layout, &params, &mask, &obs, 0.0).unwrap();
        let exact = parameter_shift_gradient(Backend::Exact, &layout, &params, &mask, &obs).unwrap();
        assert_abs_diff_eq!(noisy.energy, exact.energy, epsilon = 1e-10);
        for (a, b) in noisy.gradient.values().iter().zip(exact.gradient.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn fully_depolarizing_noise_kills_the_gradient() {
        // p = 15/16 replaces the pair state with I/4 after the single gate;
        // the output no longer depends on theta, so the gradient vanishes
        let layout = CircuitLayout::build(4, 1).unwrap();
        let p = layout.slot_count();
        let mut params = ParameterVector::zeros(p);
        let mut mask = ActivationMask::all_inactive(p);
        mask.activate(0);
        params[0] = 0.9;
        let obs = Observable::xxz_chain(4, 1.0).unwrap();
        let shift = shift_gradient_noisy(&layout, &params, &mask, &obs, 15.0 / 16.0).unwrap();
        assert!(shift.gradient.max_abs() < 1e-12);
    }

    #[test]
    fn density_backend_size_limit() {
        assert!(DensityMatrix::singlet_chain(12).is_err());
    }
}
