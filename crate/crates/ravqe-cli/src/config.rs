//! Run configurations: JSON-file layer plus flag overrides.
//!
//! A config file holds one experiment description tagged by `experiment`;
//! unknown keys are rejected. Command-line flags override file fields, and
//! everything resolves to concrete values before the run starts, so the
//! resolved config embedded in every output file fully describes it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ravqe::optimizer::{OptimizerConfig, OptimizerKind};
use ravqe::schedule::{Strategy, StrategyKind, Trigger};
use ravqe::stabilizer::TransitionInitialState;
use ravqe::stats::QuartileConvention;

/// One experiment, as stored in a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RunConfig {
    Vqe(VqeConfig),
    Sweep(SweepConfig),
    BpVariance(BpVarianceConfig),
    Noisy(NoisyConfig),
    Transition(TransitionRunConfig),
    Collapse(CollapseConfig),
    Stats(StatsConfig),
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
}

/// Extract the expected experiment variant or fail with the actual kind.
macro_rules! expect_variant {
    ($config:expr, $variant:ident, $name:literal) => {
        match $config {
            RunConfig::$variant(inner) => Ok(inner),
            other => bail!("config file describes a different experiment ({}), expected {}", kind_of(&other), $name),
        }
    };
}

fn kind_of(config: &RunConfig) -> &'static str {
    match config {
        RunConfig::Vqe(_) => "vqe",
        RunConfig::Sweep(_) => "sweep",
        RunConfig::BpVariance(_) => "bp-variance",
        RunConfig::Noisy(_) => "noisy",
        RunConfig::Transition(_) => "transition",
        RunConfig::Collapse(_) => "collapse",
        RunConfig::Stats(_) => "stats",
    }
}

// ---------------------------------------------------------------------------
// vqe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqeConfig {
    pub n: usize,
    pub l: usize,
    pub jz: f64,
    pub strategy: Strategy,
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    pub seed: u64,
    pub record_stride: usize,
    pub success_threshold: f64,
    pub quartiles: QuartileConvention,
    pub records_out: PathBuf,
    pub summary_out: PathBuf,
    pub distribution_out: PathBuf,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            n: 8,
            l: 4,
            jz: 1.0,
            strategy: Strategy::default(),
            optimizer: OptimizerConfig::default(),
            trials: 10,
            seed: 0,
            record_stride: 10,
            success_threshold: 0.01,
            quartiles: QuartileConvention::default(),
            records_out: "vqe_records.jsonl".into(),
            summary_out: "vqe_summary.csv".into(),
            distribution_out: "vqe_distribution.csv".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n: usize,
    pub l_values: Vec<usize>,
    pub jz_values: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    pub m: usize,
    pub trigger: Trigger,
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    pub seed: u64,
    pub record_stride: usize,
    pub success_threshold: f64,
    pub quartiles: QuartileConvention,
    pub records_out: PathBuf,
    pub summary_out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 8,
            l_values: vec![1, 2, 4],
            jz_values: vec![1.0],
            strategies: vec![StrategyKind::Plain, StrategyKind::Ra],
            m: 10,
            trigger: Trigger::EqualPartition,
            optimizer: OptimizerConfig::default(),
            trials: 10,
            seed: 0,
            record_stride: 10,
            success_threshold: 0.01,
            quartiles: QuartileConvention::default(),
            records_out: "sweep_records.jsonl".into(),
            summary_out: "sweep_summary.csv".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// bp-variance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpVarianceConfig {
    pub n_values: Vec<usize>,
    pub l: usize,
    pub jz: f64,
    pub densities: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for BpVarianceConfig {
    fn default() -> Self {
        Self {
            n_values: vec![6, 8, 10],
            l: 7,
            jz: 1.0,
            densities: (1..=10).map(|k| k as f64 / 10.0).collect(),
            samples: 200,
            seed: 0,
            out: "bp_variance.csv".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// noisy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoisyConfig {
    pub n: usize,
    pub l_values: Vec<usize>,
    pub jz: f64,
    pub p_noise: f64,
    pub strategies: Vec<StrategyKind>,
    pub m: usize,
    pub trigger: Trigger,
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    pub seed: u64,
    pub record_stride: usize,
    pub success_threshold: f64,
    pub quartiles: QuartileConvention,
    pub records_out: PathBuf,
    pub summary_out: PathBuf,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        Self {
            n: 6,
            l_values: vec![2, 6],
            jz: 1.0,
            p_noise: 1e-3,
            strategies: vec![StrategyKind::Plain, StrategyKind::Ra],
            m: 10,
            trigger: Trigger::EqualPartition,
            optimizer: OptimizerConfig {
                kind: OptimizerKind::Sgd,
                maxiter: 1000,
                ..OptimizerConfig::default()
            },
            trials: 10,
            seed: 0,
            record_stride: 10,
            success_threshold: 0.01,
            quartiles: QuartileConvention::default(),
            records_out: "noisy_records.jsonl".into(),
            summary_out: "noisy_summary.csv".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// transition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionRunConfig {
    pub chain_lengths: Vec<usize>,
    pub activation_ratios: Vec<f64>,
    /// Layers per chain; 0 means the saturation default of 8 L.
    pub blocks: usize,
    pub samples: usize,
    pub initial_state: TransitionInitialState,
    pub seed: u64,
    pub fit_nu: bool,
    pub p_c: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_steps: usize,
    pub curves_out: PathBuf,
    pub collapse_out: PathBuf,
}

impl Default for TransitionRunConfig {
    fn default() -> Self {
        Self {
            chain_lengths: vec![8, 12, 16],
            activation_ratios: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            blocks: 0,
            samples: 200,
            initial_state: TransitionInitialState::SingletChain,
            seed: 0,
            fit_nu: false,
            p_c: 0.0,
            nu_min: 0.3,
            nu_max: 2.0,
            nu_steps: 35,
            curves_out: "transition_curves.csv".into(),
            collapse_out: "collapse_fit.json".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// collapse
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseConfig {
    pub curves_in: PathBuf,
    pub p_c: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_steps: usize,
    pub out: PathBuf,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self {
            curves_in: "transition_curves.csv".into(),
            p_c: 0.0,
            nu_min: 0.3,
            nu_max: 2.0,
            nu_steps: 35,
            out: "collapse_fit.json".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsConfig {
    pub records_in: PathBuf,
    pub success_threshold: f64,
    pub quartiles: QuartileConvention,
    pub summary_out: PathBuf,
    pub distribution_out: PathBuf,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            records_in: "vqe_records.jsonl".into(),
            success_threshold: 0.01,
            quartiles: QuartileConvention::default(),
            summary_out: "stats_summary.csv".into(),
            distribution_out: "stats_distribution.csv".into(),
        }
    }
}

pub use expect_helpers::*;

mod expect_helpers {
    use super::*;

    pub fn expect_vqe(config: RunConfig) -> Result<VqeConfig> {
        expect_variant!(config, Vqe, "vqe")
    }
    pub fn expect_sweep(config: RunConfig) -> Result<SweepConfig> {
        expect_variant!(config, Sweep, "sweep")
    }
    pub fn expect_bp_variance(config: RunConfig) -> Result<BpVarianceConfig> {
        expect_variant!(config, BpVariance, "bp-variance")
    }
    pub fn expect_noisy(config: RunConfig) -> Result<NoisyConfig> {
        expect_variant!(config, Noisy, "noisy")
    }
    pub fn expect_transition(config: RunConfig) -> Result<TransitionRunConfig> {
        expect_variant!(config, Transition, "transition")
    }
    pub fn expect_collapse(config: RunConfig) -> Result<CollapseConfig> {
        expect_variant!(config, Collapse, "collapse")
    }
    pub fn expect_stats(config: RunConfig) -> Result<StatsConfig> {
        expect_variant!(config, Stats, "stats")
    }
}
