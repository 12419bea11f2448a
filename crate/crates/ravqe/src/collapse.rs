//! Finite-size data collapse for the entanglement transition.
//!
//! Points `S(p, L)` are rescaled to `x = (p - p_c) * L^(1/nu)` and scored
//! against a master curve: for every point, the prediction is the
//! piecewise-linear interpolation of the rescaled points of the *other*
//! chain lengths at its `x`, and the cost is the mean squared deviation.
//! The returned exponent minimizes that cost over the candidate grid.
//!
//! The scaling form fixes `S(p_c) = 0`, so the master curve used for the
//! exponent estimate is anchored at `(x, S) = (0, 0)`; without the anchor,
//! curves sampled entirely in the saturated regime carry no exponent
//! information. The degeneracy diagnostic (`flat`) is evaluated on the
//! unanchored cost profile: if that profile does not vary with the
//! exponent at all, the input curves cannot be collapsed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stabilizer::TransitionCurve;

/// Result of a collapse fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    /// Exponent with the lowest collapse cost.
    pub nu: f64,
    /// Mean squared deviation from the master curve at the best exponent.
    pub cost: f64,
    /// True when the unanchored cost profile does not vary with the
    /// exponent at all, e.g. for size-independent curves: the inputs carry
    /// no collapse information.
    pub flat: bool,
    /// The full (nu, cost) profile over the candidate grid (anchored).
    pub profile: Vec<(f64, f64)>,
}

/// Fit the correlation-length exponent by data collapse.
///
/// Needs at least three distinct chain lengths and at least two activation
/// ratios per length.
pub fn data_collapse(curves: &[TransitionCurve], p_c: f64, nu_grid: &[f64]) -> Result<CollapseFit> {
    if nu_grid.is_empty() {
        return Err(Error::InvalidConfig("empty exponent grid".into()));
    }
    let mut lengths: Vec<usize> = curves.iter().map(|c| c.chain_length).collect();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "data collapse needs at least 3 distinct chain lengths, got {}",
            lengths.len()
        )));
    }
    for &len in &lengths {
        let points = curves.iter().filter(|c| c.chain_length == len).count();
        if points < 2 {
            return Err(Error::InvalidConfig(format!(
                "chain length {len} has {points} activation-ratio points; need at least 2"
            )));
        }
    }

    let mut profile = Vec::with_capacity(nu_grid.len());
    let mut unanchored = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        if !(nu > 0.0) {
            return Err(Error::InvalidConfig(format!("exponents must be positive, got {nu}")));
        }
        profile.push((nu, collapse_cost(curves, &lengths, p_c, nu, true)));
        unanchored.push(collapse_cost(curves, &lengths, p_c, nu, false));
    }
    let best = profile
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("profile is non-empty");
    let finite: Vec<f64> = unanchored.iter().copied().filter(|c| c.is_finite()).collect();
    let flat = if finite.is_empty() {
        true
    } else {
        let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo).abs() <= 1e-9 * hi.abs().max(1e-12)
    };
    Ok(CollapseFit { nu: best.0, cost: best.1, flat, profile })
}

fn collapse_cost(curves: &[TransitionCurve], lengths: &[usize], p_c: f64, nu: f64, anchored: bool) -> f64 {
    let rescale = |c: &TransitionCurve| (c.activation_ratio - p_c) * (c.chain_length as f64).powf(1.0 / nu);
    let mut total = 0.0;
    let mut used = 0usize;
    for &len in lengths {
        // master curve from the other lengths
        let mut master: Vec<(f64, f64)> = curves
            .iter()
            .filter(|c| c.chain_length != len)
            .map(|c| (rescale(c), c.mean_entropy))
            .collect();
        if anchored {
            master.push((0.0, 0.0));
        }
        master.sort_by(|a, b| a.0.total_cmp(&b.0));
        for point in curves.iter().filter(|c| c.chain_length == len) {
            let x = rescale(point);
            if let Some(predicted) = interpolate(&master, x) {
                total += (point.mean_entropy - predicted).powi(2);
                used += 1;
            }
        }
    }
    if used == 0 {
        f64::INFINITY
    } else {
        total / used as f64
    }
}

/// Piecewise-linear interpolation; `None` outside the sampled range.
fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    if points.is_empty() || x < points[0].0 || x > points[points.len() - 1].0 {
        return None;
    }
    let hi = points.partition_point(|&(px, _)| px < x);
    if hi == 0 {
        return Some(points[0].1);
    }
    if hi >= points.len() {
        return Some(points[points.len() - 1].1);
    }
    let (x0, y0) = points[hi - 1];
    let (x1, y1) = points[hi];
    if x1 == x0 {
        return Some(0.5 * (y0 + y1));
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Evenly spaced exponent grid, inclusive of both ends.
pub fn nu_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}
