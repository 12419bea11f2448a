//! Energy-evaluation backend selection.

use serde::{Deserialize, Serialize};

use crate::density;
use crate::error::Result;
use crate::layout::{ActivationMask, CircuitLayout, ParameterVector};
use crate::observable::Observable;
use crate::state::StateVector;

/// Which simulator evaluates VQE energies. Both start from the singlet chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Backend {
    /// Exact statevector expectations.
    Exact,
    /// Density-matrix simulation with a two-qubit depolarizing channel of
    /// strength `p_noise` after every implemented (active) gate.
    Depolarizing { p_noise: f64 },
}

impl Backend {
    /// `E(theta)` for the circuit applied to the singlet chain.
    pub fn energy(
        &self,
        layout: &CircuitLayout,
        params: &ParameterVector,
        mask: &ActivationMask,
        obs: &Observable,
    ) -> Result<f64> {
        match *self {
            Backend::Exact => {
                let mut state = StateVector::singlet_chain(layout.n_qubits())?;
                state.apply_circuit(layout, params, mask)?;
                obs.expectation(&state)
            }
            Backend::Depolarizing { p_noise } => density::noisy_energy(layout, params, mask, obs, p_noise),
        }
    }
}
