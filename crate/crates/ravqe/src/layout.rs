//! HVA circuit description: gate slots, parameter vectors, activation masks.
//!
//! A depth-`l` layout on `n` qubits has `p = 3 n l` slots. Within each layer
//! the application order is even-XX, even-YY, even-ZZ, odd-XX, odd-YY,
//! odd-ZZ; even bonds are `(2j, 2j+1)`, odd bonds `(2j+1, 2j+2 mod n)` with
//! the periodic wrap bond `(n-1, 0)` in the odd sublayer. Flat slot indices
//! equal application order.

use std::ops::{Index, IndexMut, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observable::Axis;

/// Even/odd bond sublayer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// One two-qubit rotation position in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSlot {
    pub layer: usize,
    pub parity: Parity,
    pub axis: Axis,
    pub bond: (usize, usize),
    pub flat_index: usize,
}

/// Ordered list of gate slots for a depth-`l` HVA circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitLayout {
    n_qubits: usize,
    depth: usize,
    slots: Vec<GateSlot>,
}

impl CircuitLayout {
    pub fn build(n: usize, l: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidQubitCount {
                n,
                reason: "the HVA layout needs an even qubit count of at least 4",
            });
        }
        if l < 1 {
            return Err(Error::InvalidDepth { l });
        }
        let mut slots = Vec::with_capacity(3 * n * l);
        for layer in 0..l {
            for (parity, bonds) in [(Parity::Even, even_bonds(n)), (Parity::Odd, odd_bonds(n))] {
                for axis in [Axis::X, Axis::Y, Axis::Z] {
                    for &bond in &bonds {
                        slots.push(GateSlot { layer, parity, axis, bond, flat_index: slots.len() });
                    }
                }
            }
        }
        Ok(Self { n_qubits: n, depth: l, slots })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total parameter count `p = 3 n l`.
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[GateSlot] {
        &self.slots
    }

    /// Flat indices of layer `k`; layers are contiguous in application order.
    pub fn slots_of_layer(&self, k: usize) -> Result<Range<usize>> {
        if k >= self.depth {
            return Err(Error::LayerOutOfRange { layer: k, depth: self.depth });
        }
        let per_layer = 3 * self.n_qubits;
        Ok(per_layer * k..per_layer * (k + 1))
    }
}

fn even_bonds(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|j| (2 * j, 2 * j + 1)).collect()
}

fn odd_bonds(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|j| (2 * j + 1, (2 * j + 2) % n)).collect()
}

/// Rotation angles, one per slot. Entries at inactive slots are kept at
/// exactly zero by the scheduler contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    values: Vec<f64>,
}

impl ParameterVector {
    pub fn zeros(p: usize) -> Self {
        Self { values: vec![0.0; p] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl Index<usize> for ParameterVector {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.values[idx]
    }
}

impl IndexMut<usize> for ParameterVector {
    fn index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.values[idx]
    }
}

/// Per-slot active flags. Monotone over a run: slots only ever switch from
/// inactive to active.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationMask {
    flags: Vec<bool>,
}

impl ActivationMask {
    pub fn all_inactive(p: usize) -> Self {
        Self { flags: vec![false; p] }
    }

    pub fn all_active(p: usize) -> Self {
        Self { flags: vec![true; p] }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.flags[idx]
    }

    pub fn activate(&mut self, idx: usize) {
        self.flags[idx] = true;
    }

    pub fn active_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn fully_active(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Indices of active slots in ascending order.
    pub fn active_indices(&self) -> Vec<usize> {
        self.flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
    }
}
