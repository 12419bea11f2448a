//! A variational-quantum-eigensolver laboratory built around gate-activation
//! training schedules.
//!
//! The crate simulates VQE optimization of the 1D XXZ spin chain under a
//! Hamiltonian variational ansatz whose two-qubit gates can be activated
//! progressively during training — all at once (plain), in random batches
//! driven by per-gate structure factors, or layer by layer — and measures
//! what the activation schedule does to trainability: gradient variance,
//! convergence statistics, noise resilience, hardware resource counts, and
//! the entanglement structure of the circuit ensemble.
//!
//! Three simulation backends share one gate convention (`exp(i theta
//! sigma sigma)`, qubit 0 = most significant index bit):
//!
//! - [`state::StateVector`] — dense amplitudes, exact expectations, adjoint
//!   gradients;
//! - [`density::DensityMatrix`] — mixed states with a two-qubit depolarizing
//!   channel after every implemented gate;
//! - [`stabilizer::StabilizerTableau`] — GF(2) tableau for random-Clifford
//!   realizations of the same circuit pattern at scale.
//!
//! The narrative guide lives in `book/`; its code snippets compile as
//! doc-tests through the [`guide`] module.

pub mod backend;
pub mod collapse;
pub mod density;
pub mod error;
pub mod gradient;
pub mod harness;
pub mod layout;
pub mod observable;
pub mod optimizer;
pub mod resource;
pub mod schedule;
pub mod seed;
pub mod stabilizer;
pub mod state;
pub mod stats;

pub mod guide;

mod kernels;

pub use error::{Error, Result};
