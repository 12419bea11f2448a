//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulator backends, schedulers, and the trial harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count {n} is invalid: {reason}")]
    InvalidQubitCount { n: usize, reason: &'static str },

    #[error("circuit depth must be at least 1, got {l}")]
    InvalidDepth { l: usize },

    #[error("site index {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("sites within a Pauli term must be pairwise distinct (site {site} repeated)")]
    DuplicateSite { site: usize },

    #[error("coefficient must be finite, got {value}")]
    NonFiniteCoefficient { value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("imaginary residue {residue:.3e} of a Hermitian expectation exceeds tolerance")]
    ImaginaryResidue { residue: f64 },

    #[error("{n} qubits exceeds the dense-backend ceiling of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("layer index {layer} out of range for depth {depth}")]
    LayerOutOfRange { layer: usize, depth: usize },

    #[error("bipartition cut {cut} out of range for {n} qubits")]
    CutOutOfRange { cut: usize, n: usize },

    #[error("entropy region must be a non-empty strict subset of the chain")]
    InvalidRegion,

    #[error("noise strength {p} outside [0, 1]")]
    NoiseStrengthOutOfRange { p: f64 },

    #[error("all slots are already active")]
    AlreadyFullyActive,

    #[error("maxiter {maxiter} is smaller than the number of activation stages {stages}")]
    MaxiterTooSmall { maxiter: usize, stages: usize },

    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
