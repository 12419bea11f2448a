//! Analytic gate-count model for the hardware cost of plain versus
//! random-activation training.
//!
//! With `p` trainable parameters, plain training needs `N_g = 2 p^2 e^(2p)`
//! total two-qubit gates (two shifted expectations per parameter, `O(e^{2p})`
//! shots against the exponentially vanishing gradients, `p` gates per shot).
//! Activating a `1/m` fraction per round instead gives
//! `N'_g = (1/m) sum_{k=1}^m (k/m)^2 2 p^2 e^(2kp/m)`, which converges to
//! `(-1 + (2p^2 - 2p + 1) e^(2p)) / (2p)` as `m -> infinity`; the savings
//! ratio approaches `1/(2p)` in the leading order. Everything is evaluated
//! in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate-count comparison between plain and random-activation training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceModel {
    pub p_params: usize,
    pub m: usize,
    /// `ln N_g` for plain training.
    pub log_plain_gates: f64,
    /// `ln N'_g` for the finite-`m` schedule.
    pub log_ra_gates: f64,
    /// `N'_g / N_g`.
    pub ratio: f64,
    /// `ln` of the `m -> infinity` closed form.
    pub log_ra_gates_limit: f64,
    /// Leading-order savings ratio `1/(2p)`.
    pub leading_order_ratio: f64,
}

/// Evaluate the gate-count model at `p` parameters and `m` activation rounds.
pub fn resource_model(p_params: usize, m: usize) -> Result<ResourceModel> {
    if p_params < 1 {
        return Err(Error::InvalidConfig("the model needs at least one parameter".into()));
    }
    if m < 1 {
        return Err(Error::InvalidConfig("the model needs at least one activation round".into()));
    }
    let p = p_params as f64;
    let log_plain = 2f64.ln() + 2.0 * p.ln() + 2.0 * p;

    // logsumexp over k of ln(2 p^2) + 2 ln(k/m) + 2 k p / m, shifted by the
    // dominant k = m term, then divided by m
    let mf = m as f64;
    let t_max = 2f64.ln() + 2.0 * p.ln() + 2.0 * p;
    let mut acc = 0.0f64;
    for k in 1..=m {
        let kf = k as f64 / mf;
        let t = 2f64.ln() + 2.0 * p.ln() + 2.0 * kf.ln() + 2.0 * kf * p;
        acc += (t - t_max).exp();
    }
    let log_ra = t_max + acc.ln() - mf.ln();

    Ok(ResourceModel {
        p_params,
        m,
        log_plain_gates: log_plain,
        log_ra_gates: log_ra,
        ratio: (log_ra - log_plain).exp(),
        log_ra_gates_limit: log_ra_gates_closed_form(p_params),
        leading_order_ratio: 1.0 / (2.0 * p),
    })
}

/// `ln` of the `m -> infinity` gate count
/// `(-1 + (2p^2 - 2p + 1) e^(2p)) / (2p)`.
pub fn log_ra_gates_closed_form(p_params: usize) -> f64 {
    let p = p_params as f64;
    let polynomial = 2.0 * p * p - 2.0 * p + 1.0;
    2.0 * p + (polynomial - (-2.0 * p).exp()).ln() - (2.0 * p).ln()
}
