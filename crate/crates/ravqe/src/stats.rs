//! Box-plot summary statistics and distribution helpers for converged
//! trial energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How quartiles treat the median element for odd-length data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuartileConvention {
    /// Tukey hinges: each half includes the median element (the quartile is
    /// the median of the values between the extreme and the median,
    /// endpoints included).
    #[default]
    InclusiveMedian,
    /// Each half excludes the median element.
    ExclusiveMedian,
}

/// Five-number summary with fences, whiskers, and outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub iqr: f64,
    /// `q1 - 1.5 * iqr`.
    pub lower_fence: f64,
    /// `q3 + 1.5 * iqr`.
    pub upper_fence: f64,
    /// Most extreme values inside the fences.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Box statistics under the default (inclusive-median) convention.
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    box_stats_with(values, QuartileConvention::InclusiveMedian)
}

pub fn box_stats_with(values: &[f64], convention: QuartileConvention) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput { context: "box statistics" });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = midpoint_median(&sorted);
    let (lower, upper): (&[f64], &[f64]) = if n % 2 == 0 {
        (&sorted[..n / 2], &sorted[n / 2..])
    } else {
        match convention {
            QuartileConvention::InclusiveMedian => (&sorted[..=n / 2], &sorted[n / 2..]),
            QuartileConvention::ExclusiveMedian if n == 1 => (&sorted[..], &sorted[..]),
            QuartileConvention::ExclusiveMedian => (&sorted[..n / 2], &sorted[n / 2 + 1..]),
        }
    };
    let q1 = midpoint_median(lower);
    let q3 = midpoint_median(upper);
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    let inside: Vec<f64> = sorted.iter().copied().filter(|&v| v >= lower_fence && v <= upper_fence).collect();
    let (whisker_low, whisker_high) = if inside.is_empty() {
        (median, median)
    } else {
        (inside[0], inside[inside.len() - 1])
    };
    let outliers: Vec<f64> = sorted.iter().copied().filter(|&v| v < lower_fence || v > upper_fence).collect();
    Ok(BoxStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[n - 1],
        mean: sorted.iter().sum::<f64>() / n as f64,
        iqr,
        lower_fence,
        upper_fence,
        whisker_low,
        whisker_high,
        outliers,
    })
}

fn midpoint_median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Sorted values paired with cumulative fractions `k/N`, `k = 1..N`.
pub fn accumulated_distribution(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput { context: "accumulated distribution" });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.into_iter().enumerate().map(|(k, v)| (v, (k + 1) as f64 / n)).collect())
}

/// `(e - e_exact) / |e_exact|`.
pub fn relative_error(e: f64, e_exact: f64) -> Result<f64> {
    if e_exact == 0.0 {
        return Err(Error::InvalidConfig("relative error is undefined against a zero reference".into()));
    }
    Ok((e - e_exact) / e_exact.abs())
}
