//! Gradient-descent steppers masked to active parameters.
//!
//! Both optimizers share the exponentially decayed learning rate
//! `lr(t) = learning_rate * decay_rate^(t / decay_steps)` with a real-valued
//! exponent (no staircase). Adam keeps per-slot moments and a per-slot update
//! count so that a parameter activated mid-run is bias-corrected as if
//! freshly created.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::Gradient;
use crate::layout::{ActivationMask, ParameterVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub decay_steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub maxiter: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            learning_rate: 0.01,
            decay_rate: 0.9,
            decay_steps: 100,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            maxiter: 5000,
        }
    }
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        Self { kind: OptimizerKind::Sgd, learning_rate, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!("decay_rate must lie in (0, 1], got {}", self.decay_rate)));
        }
        if self.decay_steps < 1 {
            return Err(Error::InvalidConfig("decay_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Learning rate at iteration `t`.
    pub fn lr_at(&self, t: usize) -> f64 {
        self.learning_rate * self.decay_rate.powf(t as f64 / self.decay_steps as f64)
    }
}

/// Mutable optimizer state: global step counter plus Adam moment arrays.
/// Moments at never-activated slots stay exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    t: usize,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    slot_updates: Vec<u64>,
}

impl OptimizerState {
    pub fn new(p: usize) -> Self {
        Self { t: 0, first_moment: vec![0.0; p], second_moment: vec![0.0; p], slot_updates: vec![0; p] }
    }

    pub fn step_count(&self) -> usize {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }

    /// One descent step over the active slots; inactive entries are untouched
    /// (and therefore stay at exactly zero under the scheduler contract).
    pub fn step(
        &mut self,
        config: &OptimizerConfig,
        params: &mut ParameterVector,
        grad: &Gradient,
        mask: &ActivationMask,
    ) -> Result<()> {
        let p = params.len();
        if grad.len() != p || mask.len() != p || self.first_moment.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: grad.len() });
        }
        let lr = config.lr_at(self.t);
        for i in 0..p {
            if !mask.is_active(i) {
                continue;
            }
            let g = grad.values()[i];
            match config.kind {
                OptimizerKind::Sgd => {
                    params[i] -= lr * g;
                }
                OptimizerKind::Adam => {
                    self.slot_updates[i] += 1;
                    let tk = self.slot_updates[i] as i32;
                    let m = config.beta1 * self.first_moment[i] + (1.0 - config.beta1) * g;
                    let v = config.beta2 * self.second_moment[i] + (1.0 - config.beta2) * g * g;
                    self.first_moment[i] = m;
                    self.second_moment[i] = v;
                    let m_hat = m / (1.0 - config.beta1.powi(tk));
                    let v_hat = v / (1.0 - config.beta2.powi(tk));
                    params[i] -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
                }
            }
        }
        self.t += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_slot(theta: f64) -> (ParameterVector, ActivationMask) {
        (ParameterVector::from_values(vec![theta]), ActivationMask::all_active(1))
    }

    #[test]
    fn learning_rate_decay_reference_points() {
        let config = OptimizerConfig::default();
        assert_abs_diff_eq!(config.lr_at(0), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(config.lr_at(100), 0.009, epsilon = 1e-15);
        assert_abs_diff_eq!(config.lr_at(200), 0.0081, epsilon = 1e-15);
        // continuous exponent, not staircase
        assert_abs_diff_eq!(config.lr_at(50), 0.01 * 0.9f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        c = OptimizerConfig::default();
        c.decay_rate = 1.5;
        assert!(c.validate().is_err());
        c = OptimizerConfig::default();
        c.decay_steps = 0;
        assert!(c.validate().is_err());
        assert!(OptimizerConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let config = OptimizerConfig { kind, ..Default::default() };
            let (mut params, mask) = one_slot(0.7);
            let mut state = OptimizerState::new(1);
            state.step(&config, &mut params, &Gradient::from_values(vec![0.0]), &mask).unwrap();
            assert_eq!(params[0], 0.7);
        }
    }

    #[test]
    fn sgd_first_step_is_lr_times_gradient() {
        let config = OptimizerConfig::sgd(0.01);
        let (mut params, mask) = one_slot(1.0);
        let mut state = OptimizerState::new(1);
        state.step(&config, &mut params, &Gradient::from_values(vec![2.0]), &mask).unwrap();
        assert_abs_diff_eq!(params[0], 1.0 - 0.02, epsilon = 1e-15);
    }

    #[test]
    fn adam_first_step_is_roughly_signed_lr() {
        let config = OptimizerConfig::default();
        let (mut params, mask) = one_slot(0.0);
        let mut state = OptimizerState::new(1);
        state.step(&config, &mut params, &Gradient::from_values(vec![0.5]), &mask).unwrap();
        // bias-corrected first step: lr * g / (sqrt(g^2) + eps) ~ lr * sign(g)
        assert_abs_diff_eq!(params[0], -0.01, epsilon = 1e-7);
    }

    #[test]
    fn inactive_slots_stay_exactly_zero() {
        let config = OptimizerConfig::default();
        let mut params = ParameterVector::from_values(vec![0.3, 0.0, 0.9]);
        let mut mask = ActivationMask::all_inactive(3);
        mask.activate(0);
        mask.activate(2);
        let mut state = OptimizerState::new(3);
        for _ in 0..25 {
            let grad = Gradient::from_values(vec![0.4, 0.0, -1.3]);
            state.step(&config, &mut params, &grad, &mask).unwrap();
            assert_eq!(params[1], 0.0);
            assert_eq!(state.first_moment()[1], 0.0);
            assert_eq!(state.second_moment()[1], 0.0);
        }
    }

    #[test]
    fn late_activated_slot_gets_fresh_bias_correction() {
        let config = OptimizerConfig::default();
        let mut params = ParameterVector::from_values(vec![0.5, 0.0]);
        let mut mask = ActivationMask::all_inactive(2);
        mask.activate(0);
        let mut state = OptimizerState::new(2);
        for _ in 0..100 {
            state.step(&config, &mut params, &Gradient::from_values(vec![0.1, 0.0]), &mask).unwrap();
        }
        mask.activate(1);
        let before = params[1];
        state.step(&config, &mut params, &Gradient::from_values(vec![0.0, 0.5]), &mask).unwrap();
        // first update for the slot behaves like a fresh Adam step at the decayed lr
        let lr = config.lr_at(100);
        assert_abs_diff_eq!(before - params[1], lr, epsilon = 1e-6);
    }

    #[test]
    fn descent_on_a_cosine_valley() {
        // E(theta) = cos(2 theta), minimum -1 at pi/2
        let config = OptimizerConfig::sgd(0.01);
        let (mut params, mask) = one_slot(0.3);
        let mut state = OptimizerState::new(1);
        for _ in 0..200 {
            let g = -2.0 * (2.0 * params[0]).sin();
            state.step(&config, &mut params, &Gradient::from_values(vec![g]), &mask).unwrap();
        }
        let energy = (2.0 * params[0]).cos();
        assert!((energy - (-1.0)).abs() < 1e-3, "E = {energy}");
    }

    #[test]
    fn trajectories_are_bit_identical() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let config = OptimizerConfig { kind, ..Default::default() };
            let run = || {
                let (mut params, mask) = one_slot(0.25);
                let mut state = OptimizerState::new(1);
                let mut trace = Vec::new();
                for k in 0..50 {
                    let g = (k as f64 * 0.37).sin();
                    state.step(&config, &mut params, &Gradient::from_values(vec![g]), &mask).unwrap();
                    trace.push(params[0].to_bits());
                }
                trace
            };
            assert_eq!(run(), run());
        }
    }
}
