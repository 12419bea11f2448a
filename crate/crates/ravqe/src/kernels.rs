//! Shared amplitude-array kernels.
//!
//! Index convention: qubit 0 is the most significant bit of the amplitude
//! index, so qubit `q` of an `n`-qubit register lives at bit `n - 1 - q`.
//! Every backend in this crate uses this convention.

use num_complex::Complex64;

use crate::observable::Axis;

/// Bit position of qubit `q` inside an `n`-qubit amplitude index.
#[inline]
pub(crate) fn bit_of(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// In-place action of `exp(i * theta * sigma_i sigma_j)` on an amplitude array.
///
/// Since `(sigma sigma)^2 = I`, the gate expands to
/// `cos(theta) * psi + i * sin(theta) * (sigma_i sigma_j psi)`, which reduces
/// to a phase twist for ZZ and a stride-pair update for XX / YY.
pub(crate) fn rotate_two_pauli(amps: &mut [Complex64], n: usize, axis: Axis, i: usize, j: usize, theta: f64) {
    let mi = 1usize << bit_of(n, i);
    let mj = 1usize << bit_of(n, j);
    let (c, s) = (theta.cos(), theta.sin());
    match axis {
        Axis::Z => {
            // ZZ is diagonal: e^{+i theta} on equal bits, e^{-i theta} otherwise.
            let plus = Complex64::new(c, s);
            let minus = Complex64::new(c, -s);
            for (b, a) in amps.iter_mut().enumerate() {
                let equal = (b & mi == 0) == (b & mj == 0);
                *a *= if equal { plus } else { minus };
            }
        }
        Axis::X => {
            let is = Complex64::new(0.0, s);
            let flip = mi | mj;
            for b in 0..amps.len() {
                if b & mi != 0 {
                    continue; // visit each pair once through its bit_i = 0 member
                }
                let p = b ^ flip;
                let (ab, ap) = (amps[b], amps[p]);
                amps[b] = c * ab + is * ap;
                amps[p] = c * ap + is * ab;
            }
        }
        Axis::Y => {
            // <b|YY|p> = -1 when bits i and j agree in b, +1 otherwise.
            let is = Complex64::new(0.0, s);
            let flip = mi | mj;
            for b in 0..amps.len() {
                if b & mi != 0 {
                    continue;
                }
                let p = b ^ flip;
                let sign = if b & mj == 0 { -1.0 } else { 1.0 };
                let (ab, ap) = (amps[b], amps[p]);
                amps[b] = c * ab + sign * is * ap;
                amps[p] = c * ap + sign * is * ab;
            }
        }
    }
}

/// Action of the bare generator `sigma_i sigma_j` on an amplitude array,
/// written into `dst`. Every destination entry is overwritten.
pub(crate) fn apply_pauli_pair(src: &[Complex64], dst: &mut [Complex64], n: usize, axis: Axis, i: usize, j: usize) {
    let mi = 1usize << bit_of(n, i);
    let mj = 1usize << bit_of(n, j);
    match axis {
        Axis::Z => {
            for (b, (&a, d)) in src.iter().zip(dst.iter_mut()).enumerate() {
                let equal = (b & mi == 0) == (b & mj == 0);
                *d = if equal { a } else { -a };
            }
        }
        Axis::X => {
            let flip = mi | mj;
            for (b, d) in dst.iter_mut().enumerate() {
                *d = src[b ^ flip];
            }
        }
        Axis::Y => {
            let flip = mi | mj;
            for (b, d) in dst.iter_mut().enumerate() {
                // source index has both bits flipped relative to b
                let p = b ^ flip;
                let sign = if (b & mi == 0) == (b & mj == 0) { -1.0 } else { 1.0 };
                *d = sign * src[p];
            }
        }
    }
}

/// Reference implementation of the same rotation through an explicit 4x4
/// matrix on the (i, j) subspace. Quadratically slower; kept as a test oracle
/// for the stride-pair kernel.
#[allow(dead_code)]
pub(crate) fn rotate_two_pauli_dense_ref(
    amps: &mut [Complex64],
    n: usize,
    axis: Axis,
    i: usize,
    j: usize,
    theta: f64,
) {
    let m = two_pauli_rotation_matrix(axis, theta);
    let bi = bit_of(n, i);
    let bj = bit_of(n, j);
    let dim = amps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (b, o) in out.iter_mut().enumerate() {
        let vi = (b >> bi) & 1;
        let vj = (b >> bj) & 1;
        let row = (vi << 1) | vj;
        for col in 0..4 {
            let src = (b & !(1 << bi) & !(1 << bj)) | (((col >> 1) & 1) << bi) | ((col & 1) << bj);
            *o += m[row][col] * amps[src];
        }
    }
    amps.copy_from_slice(&out);
}

/// The 4x4 matrix of `exp(i * theta * sigma (x) sigma)` in the two-qubit
/// computational basis |00>, |01>, |10>, |11>.
pub(crate) fn two_pauli_rotation_matrix(axis: Axis, theta: f64) -> [[Complex64; 4]; 4] {
    let z = Complex64::new(0.0, 0.0);
    let c = Complex64::new(theta.cos(), 0.0);
    let is = Complex64::new(0.0, theta.sin());
    match axis {
        Axis::X => [
            [c, z, z, is],
            [z, c, is, z],
            [z, is, c, z],
            [is, z, z, c],
        ],
        Axis::Y => [
            [c, z, z, -is],
            [z, c, is, z],
            [z, is, c, z],
            [-is, z, z, c],
        ],
        Axis::Z => [
            [c + is, z, z, z],
            [z, c - is, z, z],
            [z, z, c - is, z],
            [z, z, z, c + is],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let dim = 1 << n;
        let mut v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        v
    }

    #[test]
    fn stride_kernel_matches_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
            let theta = rng.gen_range(-7.0..7.0);
            let mut a = random_state(n, &mut rng);
            let mut b = a.clone();
            rotate_two_pauli(&mut a, n, axis, i, j, theta);
            rotate_two_pauli_dense_ref(&mut b, n, axis, i, j, theta);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-12, "axis {axis:?} i {i} j {j}");
            }
        }
    }

    #[test]
    fn generator_application_squares_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let n = 4;
            let src = random_state(n, &mut rng);
            let mut once = vec![Complex64::default(); src.len()];
            let mut twice = vec![Complex64::default(); src.len()];
            apply_pauli_pair(&src, &mut once, n, axis, 1, 3);
            apply_pauli_pair(&once, &mut twice, n, axis, 1, 3);
            for (x, y) in twice.iter().zip(&src) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }
}
