//! GF(2) stabilizer-tableau simulation of the circuit pattern with random
//! two-qubit Clifford gates, for the entanglement-transition experiment.
//!
//! The two-qubit Clifford group modulo phases (11520 elements) is enumerated
//! once by breadth-first search over {H, S, CNOT} words; sampling picks a
//! uniform table index, so every element carries both its symplectic action
//! and a concrete gate word that the dense backend can replay as unitaries.
//! Generator rows store X/Z bit masks plus a sign; entanglement entropy is
//! `rank_GF(2)(rows restricted to the region) - |region|`, signs ignored.

use std::ops::Range;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::bit_of;
use crate::layout::CircuitLayout;
use crate::seed::derive_seed;
use crate::state::StateVector;

/// Order of the two-qubit Clifford group modulo phases.
pub const TWO_QUBIT_CLIFFORD_ORDER: usize = 11_520;

/// Order of Sp(4, 2), the symplectic quotient (sign bits forgotten).
pub const SYMPLECTIC_CLASS_COUNT: usize = 720;

// ---------------------------------------------------------------------------
// Pauli images and elementary gates on a qubit pair
// ---------------------------------------------------------------------------

/// A signed two-qubit Pauli in (x, z) bit form; bit q addresses pair qubit q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PairPauli {
    x: u8,
    z: u8,
    negated: bool,
}

impl PairPauli {
    fn apply(&mut self, gate: PairGate) {
        match gate {
            PairGate::H(q) => {
                let xq = (self.x >> q) & 1;
                let zq = (self.z >> q) & 1;
                self.negated ^= xq & zq == 1;
                self.x ^= (xq ^ zq) << q;
                self.z ^= (xq ^ zq) << q;
            }
            PairGate::S(q) => {
                let xq = (self.x >> q) & 1;
                let zq = (self.z >> q) & 1;
                self.negated ^= xq & zq == 1;
                self.z ^= xq << q;
            }
            PairGate::Cnot(a, b) => {
                let xa = (self.x >> a) & 1;
                let zb = (self.z >> b) & 1;
                let xb = (self.x >> b) & 1;
                let za = (self.z >> a) & 1;
                self.negated ^= xa & zb & (xb ^ za ^ 1) == 1;
                self.x ^= xa << b;
                self.z ^= zb << a;
            }
        }
    }

    fn pack(&self) -> u32 {
        (self.x as u32) | ((self.z as u32) << 2) | ((self.negated as u32) << 4)
    }
}

/// Elementary Clifford gate on a qubit pair; qubit labels are 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairGate {
    H(u8),
    S(u8),
    Cnot(u8, u8),
}

const PAIR_GENERATORS: [PairGate; 6] = [
    PairGate::H(0),
    PairGate::H(1),
    PairGate::S(0),
    PairGate::S(1),
    PairGate::Cnot(0, 1),
    PairGate::Cnot(1, 0),
];

// ---------------------------------------------------------------------------
// The enumerated Clifford group
// ---------------------------------------------------------------------------

/// One two-qubit Clifford element: the conjugation images of X0, Z0, X1, Z1
/// and a generator word realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordElement {
    images: [PairPauli; 4],
    word: Vec<PairGate>,
    index: usize,
}

impl CliffordElement {
    /// Position in the canonical enumeration.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Generator word (H/S/CNOT on pair qubits) realizing this element.
    pub fn word(&self) -> &[PairGate] {
        &self.word
    }

    /// Word of the inverse element: the word reversed, with S replaced by
    /// S^3 (H and CNOT are involutions).
    pub fn inverse_word(&self) -> Vec<PairGate> {
        let mut out = Vec::with_capacity(3 * self.word.len());
        for gate in self.word.iter().rev() {
            match gate {
                PairGate::S(q) => out.extend([PairGate::S(*q); 3]),
                g => out.push(*g),
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// The 4x4 GF(2) symplectic matrix: column j is the (x0, x1, z0, z1)
    /// vector of the image of the j-th generator (X0, Z0, X1, Z1).
    pub fn symplectic_matrix(&self) -> [[u8; 4]; 4] {
        let mut m = [[0u8; 4]; 4];
        for (col, image) in self.images.iter().enumerate() {
            let v = [image.x & 1, (image.x >> 1) & 1, image.z & 1, (image.z >> 1) & 1];
            for (row, &bit) in v.iter().enumerate() {
                m[row][col] = bit;
            }
        }
        m
    }

    /// Sign bits of the four generator images.
    pub fn sign_bits(&self) -> [bool; 4] {
        [
            self.images[0].negated,
            self.images[1].negated,
            self.images[2].negated,
            self.images[3].negated,
        ]
    }

    /// Key identifying the symplectic class (signs forgotten).
    pub fn symplectic_key(&self) -> u16 {
        let mut key = 0u16;
        for (k, image) in self.images.iter().enumerate() {
            key |= ((image.x as u16) | ((image.z as u16) << 2)) << (4 * k);
        }
        key
    }

    fn pack(images: &[PairPauli; 4]) -> u32 {
        images.iter().enumerate().map(|(k, img)| img.pack() << (5 * k)).fold(0, |a, b| a | b)
    }
}

/// The full enumerated group, built once by BFS from the identity.
pub fn clifford_table() -> &'static [CliffordElement] {
    static TABLE: OnceLock<Vec<CliffordElement>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let identity = [
            PairPauli { x: 0b01, z: 0b00, negated: false }, // X0
            PairPauli { x: 0b00, z: 0b01, negated: false }, // Z0
            PairPauli { x: 0b10, z: 0b00, negated: false }, // X1
            PairPauli { x: 0b00, z: 0b10, negated: false }, // Z1
        ];
        let mut seen = std::collections::HashSet::with_capacity(TWO_QUBIT_CLIFFORD_ORDER * 2);
        let mut elements = Vec::with_capacity(TWO_QUBIT_CLIFFORD_ORDER);
        seen.insert(CliffordElement::pack(&identity));
        elements.push(CliffordElement { images: identity, word: Vec::new(), index: 0 });
        let mut frontier = std::collections::VecDeque::from([0usize]);
        while let Some(at) = frontier.pop_front() {
            for gate in PAIR_GENERATORS {
                let mut images = elements[at].images;
                for img in &mut images {
                    img.apply(gate);
                }
                let key = CliffordElement::pack(&images);
                if seen.insert(key) {
                    let mut word = elements[at].word.clone();
                    word.push(gate);
                    let index = elements.len();
                    elements.push(CliffordElement { images, word, index });
                    frontier.push_back(index);
                }
            }
        }
        assert_eq!(elements.len(), TWO_QUBIT_CLIFFORD_ORDER);
        elements
    })
}

/// Uniform draw from the two-qubit Clifford group (modulo phases).
pub fn sample_two_qubit_clifford(rng: &mut impl Rng) -> &'static CliffordElement {
    let table = clifford_table();
    &table[rng.gen_range(0..table.len())]
}

// ---------------------------------------------------------------------------
// Stabilizer tableau
// ---------------------------------------------------------------------------

/// One stabilizer generator: X/Z bit masks over the chain plus a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorRow {
    pub x: u64,
    pub z: u64,
    pub negated: bool,
}

/// Stabilizer state of `n` qubits as `n` commuting generator rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n_qubits: usize,
    rows: Vec<GeneratorRow>,
}

impl StabilizerTableau {
    /// Singlet-chain stabilizers: `-X X` and `-Z Z` on each pair.
    pub fn singlet_chain(n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 || n > 64 {
            return Err(Error::InvalidQubitCount { n, reason: "singlet tableau needs an even count of at most 64" });
        }
        let mut rows = Vec::with_capacity(n);
        for pair in 0..n / 2 {
            let mask = (1u64 << (2 * pair)) | (1u64 << (2 * pair + 1));
            rows.push(GeneratorRow { x: mask, z: 0, negated: true });
            rows.push(GeneratorRow { x: 0, z: mask, negated: true });
        }
        Ok(Self { n_qubits: n, rows })
    }

    /// `|0...0>` stabilizers: `+Z_q` per qubit.
    pub fn all_zeros(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidQubitCount { n, reason: "tableau supports 1 to 64 qubits" });
        }
        let rows = (0..n).map(|q| GeneratorRow { x: 0, z: 1u64 << q, negated: false }).collect();
        Ok(Self { n_qubits: n, rows })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rows(&self) -> &[GeneratorRow] {
        &self.rows
    }

    fn apply_pair_gate(&mut self, gate: PairGate, i: usize, j: usize) {
        let site = |q: u8| if q == 0 { i } else { j };
        match gate {
            PairGate::H(q) => {
                let m = 1u64 << site(q);
                for row in &mut self.rows {
                    let xq = row.x & m;
                    let zq = row.z & m;
                    row.negated ^= xq != 0 && zq != 0;
                    if (xq != 0) != (zq != 0) {
                        row.x ^= m;
                        row.z ^= m;
                    }
                }
            }
            PairGate::S(q) => {
                let m = 1u64 << site(q);
                for row in &mut self.rows {
                    let xq = row.x & m;
                    row.negated ^= xq != 0 && row.z & m != 0;
                    if xq != 0 {
                        row.z ^= m;
                    }
                }
            }
            PairGate::Cnot(a, b) => {
                let ma = 1u64 << site(a);
                let mb = 1u64 << site(b);
                for row in &mut self.rows {
                    let xa = row.x & ma != 0;
                    let zb = row.z & mb != 0;
                    let xb = row.x & mb != 0;
                    let za = row.z & ma != 0;
                    row.negated ^= xa && zb && (xb == za);
                    if xa {
                        row.x ^= mb;
                    }
                    if zb {
                        row.z ^= ma;
                    }
                }
            }
        }
    }

    /// Conjugate every generator through a Clifford element acting on sites
    /// `(i, j)`.
    pub fn apply_clifford(&mut self, element: &CliffordElement, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::DuplicateSite { site: i });
        }
        for site in [i, j] {
            if site >= self.n_qubits {
                return Err(Error::SiteOutOfRange { site, n: self.n_qubits });
            }
        }
        for &gate in element.word() {
            self.apply_pair_gate(gate, i, j);
        }
        Ok(())
    }

    /// Replay an explicit gate word on sites `(i, j)`.
    pub fn apply_word(&mut self, word: &[PairGate], i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::DuplicateSite { site: i });
        }
        for &gate in word {
            self.apply_pair_gate(gate, i, j);
        }
        Ok(())
    }

    /// Entanglement entropy of a contiguous region, in bits (an integer for
    /// stabilizer states): GF(2) rank of the region-restricted generator
    /// matrix minus the region size. Signs are ignored.
    pub fn entanglement_entropy(&self, region: Range<usize>) -> Result<usize> {
        if region.is_empty() || region.start >= self.n_qubits || region.end > self.n_qubits {
            return Err(Error::InvalidRegion);
        }
        let size = region.end - region.start;
        if size >= self.n_qubits {
            return Err(Error::InvalidRegion);
        }
        let mask = ((1u64 << size) - 1) << region.start;
        let rank = gf2_rank(self.rows.iter().map(|row| {
            let x = (row.x & mask) >> region.start;
            let z = (row.z & mask) >> region.start;
            (x as u128) | ((z as u128) << size)
        }));
        Ok(rank - size)
    }

    /// Rows are a valid stabilizer group: full rank and pairwise commuting.
    pub fn is_valid(&self) -> bool {
        let full_rank = gf2_rank(
            self.rows.iter().map(|row| (row.x as u128) | ((row.z as u128) << self.n_qubits)),
        ) == self.n_qubits;
        let commuting = self.rows.iter().enumerate().all(|(a, ra)| {
            self.rows[a + 1..].iter().all(|rb| {
                let sym = (ra.x & rb.z).count_ones() + (ra.z & rb.x).count_ones();
                sym % 2 == 0
            })
        });
        full_rank && commuting
    }
}

fn gf2_rank(rows: impl Iterator<Item = u128>) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for mut v in rows {
        for &b in &basis {
            let lead = 127 - b.leading_zeros() as usize;
            if v >> lead & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len()
}

// ---------------------------------------------------------------------------
// Transition experiment
// ---------------------------------------------------------------------------

/// Initial stabilizer state of the transition runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionInitialState {
    #[default]
    SingletChain,
    AllZeros,
}

/// One cell of the transition sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionConfig {
    pub chain_length: usize,
    pub activation_ratio: f64,
    /// Layer repetitions of the circuit pattern; the saturation regime uses
    /// 8 * chain_length.
    pub blocks: usize,
    pub samples: usize,
    #[serde(default)]
    pub initial_state: TransitionInitialState,
}

impl TransitionConfig {
    pub fn saturated(chain_length: usize, activation_ratio: f64, samples: usize) -> Self {
        Self {
            chain_length,
            activation_ratio,
            blocks: 8 * chain_length,
            samples,
            initial_state: TransitionInitialState::SingletChain,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.chain_length < 4 || self.chain_length % 2 != 0 || self.chain_length > 64 {
            return Err(Error::InvalidQubitCount {
                n: self.chain_length,
                reason: "transition runs need an even chain of 4 to 64 sites",
            });
        }
        if !(0.0..=1.0).contains(&self.activation_ratio) {
            return Err(Error::InvalidConfig(format!(
                "activation ratio must lie in [0, 1], got {}",
                self.activation_ratio
            )));
        }
        if self.blocks == 0 || self.samples == 0 {
            return Err(Error::InvalidConfig("blocks and samples must be nonzero".into()));
        }
        Ok(())
    }
}

/// Mean half-chain entropy at one `(L, p)` point. Serialized field names
/// match the CSV schema `(L, p, blocks, samples, mean_S, stderr)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCurve {
    #[serde(rename = "L")]
    pub chain_length: usize,
    #[serde(rename = "p")]
    pub activation_ratio: f64,
    pub blocks: usize,
    pub samples: usize,
    /// Mean half-chain entanglement entropy in bits.
    #[serde(rename = "mean_S")]
    pub mean_entropy: f64,
    pub stderr: f64,
}

/// Run the transition protocol: per sample, activate each slot of the
/// `blocks`-layer circuit pattern independently with probability `p`,
/// replace every active slot with a fresh uniform two-qubit Clifford,
/// evolve the initial tableau, and measure the half-chain entropy.
pub fn run_transition(config: &TransitionConfig, seed: u64) -> Result<TransitionCurve> {
    config.validate()?;
    let layout = CircuitLayout::build(config.chain_length, config.blocks)?;
    let entropies: Vec<usize> = (0..config.samples)
        .into_par_iter()
        .map(|sample| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, sample as u64, "transition-sample"));
            let mut tableau = match config.initial_state {
                TransitionInitialState::SingletChain => StabilizerTableau::singlet_chain(config.chain_length)?,
                TransitionInitialState::AllZeros => StabilizerTableau::all_zeros(config.chain_length)?,
            };
            for slot in layout.slots() {
                if rng.gen_bool(config.activation_ratio) {
                    let element = sample_two_qubit_clifford(&mut rng);
                    tableau.apply_clifford(element, slot.bond.0, slot.bond.1)?;
                }
            }
            tableau.entanglement_entropy(0..config.chain_length / 2)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_and_stderr(&entropies);
    Ok(TransitionCurve {
        chain_length: config.chain_length,
        activation_ratio: config.activation_ratio,
        blocks: config.blocks,
        samples: config.samples,
        mean_entropy: mean,
        stderr,
    })
}

fn mean_and_stderr(values: &[usize]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Agreement report between the tableau and the dense statevector backend on
/// identical circuit realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub samples: usize,
    pub tableau_mean: f64,
    pub dense_mean: f64,
    /// Largest per-sample |tableau - dense| entropy gap, in bits.
    pub max_gap: f64,
}

/// Execute the transition protocol on both backends with identical draws and
/// compare half-chain entropies sample by sample. Dense simulation caps the
/// chain at 10 sites.
pub fn statevector_crosscheck(config: &TransitionConfig, seed: u64) -> Result<CrosscheckReport> {
    config.validate()?;
    if config.chain_length > 10 {
        return Err(Error::TooManyQubits { n: config.chain_length, max: 10 });
    }
    let layout = CircuitLayout::build(config.chain_length, config.blocks)?;
    let n = config.chain_length;
    let results: Vec<(usize, f64)> = (0..config.samples)
        .into_par_iter()
        .map(|sample| -> Result<(usize, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, sample as u64, "transition-sample"));
            let mut tableau = match config.initial_state {
                TransitionInitialState::SingletChain => StabilizerTableau::singlet_chain(n)?,
                TransitionInitialState::AllZeros => StabilizerTableau::all_zeros(n)?,
            };
            let mut amps = match config.initial_state {
                TransitionInitialState::SingletChain => StateVector::singlet_chain(n)?.amplitudes().to_vec(),
                TransitionInitialState::AllZeros => {
                    StateVector::computational_basis(n, 0)?.amplitudes().to_vec()
                }
            };
            for slot in layout.slots() {
                if rng.gen_bool(config.activation_ratio) {
                    let element = sample_two_qubit_clifford(&mut rng);
                    tableau.apply_clifford(element, slot.bond.0, slot.bond.1)?;
                    for &gate in element.word() {
                        apply_pair_gate_dense(&mut amps, n, gate, slot.bond.0, slot.bond.1);
                    }
                }
            }
            let tab = tableau.entanglement_entropy(0..n / 2)?;
            let state = StateVector::from_amplitudes(n, amps)?;
            let dense = state.entanglement_entropy(n / 2)?;
            Ok((tab, dense))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = results.len();
    let tableau_mean = results.iter().map(|r| r.0 as f64).sum::<f64>() / samples as f64;
    let dense_mean = results.iter().map(|r| r.1).sum::<f64>() / samples as f64;
    let max_gap = results.iter().map(|r| (r.0 as f64 - r.1).abs()).fold(0.0, f64::max);
    Ok(CrosscheckReport { samples, tableau_mean, dense_mean, max_gap })
}

/// Dense unitary action of an elementary pair gate, for the cross-check.
fn apply_pair_gate_dense(amps: &mut [Complex64], n: usize, gate: PairGate, i: usize, j: usize) {
    let site = |q: u8| if q == 0 { i } else { j };
    match gate {
        PairGate::H(q) => {
            let m = 1usize << bit_of(n, site(q));
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for b in 0..amps.len() {
                if b & m != 0 {
                    continue;
                }
                let (a0, a1) = (amps[b], amps[b | m]);
                amps[b] = r * (a0 + a1);
                amps[b | m] = r * (a0 - a1);
            }
        }
        PairGate::S(q) => {
            let m = 1usize << bit_of(n, site(q));
            let phase = Complex64::new(0.0, 1.0);
            for (b, a) in amps.iter_mut().enumerate() {
                if b & m != 0 {
                    *a *= phase;
                }
            }
        }
        PairGate::Cnot(c, t) => {
            let mc = 1usize << bit_of(n, site(c));
            let mt = 1usize << bit_of(n, site(t));
            for b in 0..amps.len() {
                if b & mc != 0 && b & mt == 0 {
                    amps.swap(b, b | mt);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn table_has_the_right_order_and_class_structure() {
        let table = clifford_table();
        assert_eq!(table.len(), TWO_QUBIT_CLIFFORD_ORDER);
        let mut classes: HashMap<u16, usize> = HashMap::new();
        for e in table {
            *classes.entry(e.symplectic_key()).or_default() += 1;
        }
        assert_eq!(classes.len(), SYMPLECTIC_CLASS_COUNT);
        assert!(classes.values().all(|&c| c == 16), "each symplectic class holds 16 sign choices");
    }

    #[test]
    fn every_element_preserves_the_symplectic_form() {
        // Omega for ordering (x0, x1, z0, z1): J = [[0, I], [I, 0]]
        let omega = |u: [u8; 4], v: [u8; 4]| -> u8 {
            (u[0] & v[2]) ^ (u[2] & v[0]) ^ (u[1] & v[3]) ^ (u[3] & v[1])
        };
        for e in clifford_table() {
            let m = e.symplectic_matrix();
            let col = |j: usize| [m[0][j], m[1][j], m[2][j], m[3][j]];
            // generators ordered X0, Z0, X1, Z1: Omega(X0,Z0)=1, Omega(X0,X1)=0, ...
            let expected = [
                [0u8, 1, 0, 0],
                [1, 0, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 0],
            ];
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(omega(col(a), col(b)), expected[a][b], "element {}", e.index());
                }
            }
        }
    }

    #[test]
    fn sampling_is_uniform_over_symplectic_classes() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let draws = 1_000_000usize;
        let mut counts: HashMap<u16, usize> = HashMap::new();
        for _ in 0..draws {
            let e = sample_two_qubit_clifford(&mut rng);
            *counts.entry(e.symplectic_key()).or_default() += 1;
        }
        assert_eq!(counts.len(), SYMPLECTIC_CLASS_COUNT);
        let expected = draws as f64 / SYMPLECTIC_CLASS_COUNT as f64;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-squared critical value for 719 degrees of freedom at alpha = 0.01
        assert!(chi2 < 810.5, "chi2 = {chi2}");
    }

    #[test]
    fn element_followed_by_inverse_restores_the_tableau() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..200 {
            let mut tableau = StabilizerTableau::singlet_chain(6).unwrap();
            // scramble first
            for _ in 0..10 {
                let e = sample_two_qubit_clifford(&mut rng);
                let i = rng.gen_range(0..6);
                let mut j = rng.gen_range(0..6);
                while j == i {
                    j = rng.gen_range(0..6);
                }
                tableau.apply_clifford(e, i, j).unwrap();
            }
            let reference = tableau.clone();
            let e = sample_two_qubit_clifford(&mut rng);
            tableau.apply_clifford(e, 2, 5).unwrap();
            tableau.apply_word(&e.inverse_word(), 2, 5).unwrap();
            assert_eq!(tableau, reference);
        }
    }

    #[test]
    fn identity_element_leaves_tableaus_alone() {
        let table = clifford_table();
        let identity = &table[0];
        assert!(identity.is_identity());
        let mut tableau = StabilizerTableau::singlet_chain(4).unwrap();
        let reference = tableau.clone();
        tableau.apply_clifford(identity, 1, 3).unwrap();
        assert_eq!(tableau, reference);
    }

    #[test]
    fn cnot_like_element_conjugates_z_stabilizers() {
        // expected images of CNOT(control 0, target 1)
        let expected = [
            PairPauli { x: 0b11, z: 0b00, negated: false }, // X0 -> X0 X1
            PairPauli { x: 0b00, z: 0b01, negated: false }, // Z0 -> Z0
            PairPauli { x: 0b10, z: 0b00, negated: false }, // X1 -> X1
            PairPauli { x: 0b00, z: 0b11, negated: false }, // Z1 -> Z0 Z1
        ];
        let cnot = clifford_table().iter().find(|e| e.images == expected).expect("CNOT is in the table");
        let mut tableau = StabilizerTableau::all_zeros(2).unwrap();
        tableau.apply_clifford(cnot, 0, 1).unwrap();
        assert_eq!(tableau.rows()[0], GeneratorRow { x: 0, z: 0b01, negated: false }, "Z0 -> Z0");
        assert_eq!(tableau.rows()[1], GeneratorRow { x: 0, z: 0b11, negated: false }, "Z1 -> Z0 Z1");
    }

    #[test]
    fn rows_stay_independent_under_random_evolution() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut tableau = StabilizerTableau::singlet_chain(8).unwrap();
        for step in 0..100_000 {
            let e = sample_two_qubit_clifford(&mut rng);
            let i = rng.gen_range(0..8);
            let mut j = rng.gen_range(0..8);
            while j == i {
                j = rng.gen_range(0..8);
            }
            tableau.apply_clifford(e, i, j).unwrap();
            if step % 10_000 == 0 {
                assert!(tableau.is_valid(), "tableau degenerated at step {step}");
            }
        }
        assert!(tableau.is_valid());
    }

    #[test]
    fn singlet_tableau_structure() {
        let t = StabilizerTableau::singlet_chain(2).unwrap();
        assert_eq!(t.rows()[0], GeneratorRow { x: 0b11, z: 0, negated: true });
        assert_eq!(t.rows()[1], GeneratorRow { x: 0, z: 0b11, negated: true });
        assert!(t.is_valid());

        let t4 = StabilizerTableau::singlet_chain(4).unwrap();
        assert_eq!(t4.rows().len(), 4);
        assert!(t4.is_valid());
        assert_eq!(t4.entanglement_entropy(0..2).unwrap(), 0, "cut between pairs");
        assert_eq!(t4.entanglement_entropy(0..1).unwrap(), 1, "cut through a pair");
        assert_eq!(t4.entanglement_entropy(1..3).unwrap(), 2, "both pairs cut");

        assert!(StabilizerTableau::singlet_chain(3).is_err());
    }

    #[test]
    fn entropy_reference_cases() {
        let zeros = StabilizerTableau::all_zeros(6).unwrap();
        assert_eq!(zeros.entanglement_entropy(0..3).unwrap(), 0);

        // Bell pair on (0, 1) via H then CNOT from |00>
        let mut bell = StabilizerTableau::all_zeros(2).unwrap();
        bell.apply_word(&[PairGate::H(0), PairGate::Cnot(0, 1)], 0, 1).unwrap();
        assert_eq!(bell.entanglement_entropy(0..1).unwrap(), 1);

        assert!(zeros.entanglement_entropy(0..0).is_err());
        assert!(zeros.entanglement_entropy(0..6).is_err());
    }

    #[test]
    fn entropy_of_region_equals_complement() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let n = 8;
        let mut tableau = StabilizerTableau::singlet_chain(n).unwrap();
        for _ in 0..200 {
            let e = sample_two_qubit_clifford(&mut rng);
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            tableau.apply_clifford(e, i, j).unwrap();
        }
        for cut in 1..n {
            let a = tableau.entanglement_entropy(0..cut).unwrap();
            let b = tableau.entanglement_entropy(cut..n).unwrap();
            assert_eq!(a, b, "purity at cut {cut}");
            assert!(a <= cut.min(n - cut));
        }
    }

    #[test]
    fn transition_reference_points() {
        let p0 = TransitionConfig { chain_length: 8, activation_ratio: 0.0, blocks: 8, samples: 5, initial_state: Default::default() };
        let curve = run_transition(&p0, 11).unwrap();
        assert_eq!(curve.mean_entropy, 0.0, "no gates, even-pair cut");

        let p1 = TransitionConfig::saturated(8, 1.0, 40);
        let curve = run_transition(&p1, 11).unwrap();
        assert!(curve.mean_entropy > 2.6 && curve.mean_entropy <= 4.0, "volume-law saturation: {}", curve.mean_entropy);
    }

    #[test]
    fn transition_is_monotone_in_activation_ratio() {
        let mut last = TransitionCurve {
            chain_length: 8,
            activation_ratio: 0.0,
            blocks: 64,
            samples: 0,
            mean_entropy: 0.0,
            stderr: 0.0,
        };
        for (k, p) in [0.1, 0.4, 1.0].iter().enumerate() {
            let cfg = TransitionConfig::saturated(8, *p, 60);
            let curve = run_transition(&cfg, 13).unwrap();
            assert!(
                curve.mean_entropy + 2.0 * (curve.stderr + last.stderr) >= last.mean_entropy,
                "mean entropy should not decrease in p (step {k})"
            );
            last = curve;
        }
    }

    #[test]
    fn dense_crosscheck_matches_exactly() {
        for (len, p, blocks, samples, seed) in [(4usize, 0.5f64, 6usize, 10usize, 17u64), (6, 1.0, 8, 8, 19)] {
            let cfg = TransitionConfig {
                chain_length: len,
                activation_ratio: p,
                blocks,
                samples,
                initial_state: Default::default(),
            };
            let report = statevector_crosscheck(&cfg, seed).unwrap();
            assert!(report.max_gap < 1e-9, "entropy gap {}", report.max_gap);
        }
        let cfg = TransitionConfig { chain_length: 4, activation_ratio: 0.0, blocks: 4, samples: 4, initial_state: Default::default() };
        let report = statevector_crosscheck(&cfg, 3).unwrap();
        assert_eq!(report.tableau_mean, 0.0);
        assert!(report.dense_mean.abs() < 1e-12);
    }

    #[test]
    fn crosscheck_rejects_large_chains() {
        let cfg = TransitionConfig { chain_length: 12, activation_ratio: 0.5, blocks: 4, samples: 2, initial_state: Default::default() };
        assert!(statevector_crosscheck(&cfg, 1).is_err());
    }

    #[test]
    fn config_validation() {
        let bad_p = TransitionConfig { chain_length: 8, activation_ratio: 1.2, blocks: 8, samples: 5, initial_state: Default::default() };
        assert!(run_transition(&bad_p, 1).is_err());
        let odd = TransitionConfig { chain_length: 7, activation_ratio: 0.5, blocks: 8, samples: 5, initial_state: Default::default() };
        assert!(run_transition(&odd, 1).is_err());
    }
}
