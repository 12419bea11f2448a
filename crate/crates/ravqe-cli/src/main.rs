//! `ravqe` — gate-activation VQE experiments from the command line.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ravqe::optimizer::OptimizerKind;
use ravqe::schedule::{StrategyKind, Trigger};
use ravqe::stats::QuartileConvention;

use config::load_config;

#[derive(Parser)]
#[command(
    name = "ravqe",
    version,
    about = "VQE training experiments with gate-activation schedules on the XXZ chain",
    after_help = "Every output file embeds the resolved configuration and the artifact \
                  version. All randomness derives from --seed; reruns with the same seed \
                  produce byte-identical record files for any worker count."
)]
struct Cli {
    /// Worker threads for trial/sample parallelism (default: RAVQE_WORKERS
    /// or all cores). Does not affect results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one strategy cell and write records, summary, and the
    /// accumulated energy distribution.
    Vqe(VqeArgs),
    /// Compare strategies over a grid of depths and couplings.
    Sweep(SweepArgs),
    /// Averaged gradient variance versus activation density (trainability).
    BpVariance(BpVarianceArgs),
    /// VQE under two-qubit depolarizing noise with parameter-shift gradients.
    Noisy(NoisyArgs),
    /// Half-chain entropy of random-Clifford circuit realizations versus
    /// activation ratio, with an optional finite-size collapse fit.
    Transition(TransitionArgs),
    /// Fit the correlation-length exponent to existing transition curves.
    Collapse(CollapseArgs),
    /// Recompute summary statistics from a records file.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Plain,
    PlainStar,
    Ra,
    Laa,
    Lpa,
}

impl From<StrategyArg> for StrategyKind {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Plain => StrategyKind::Plain,
            StrategyArg::PlainStar => StrategyKind::PlainStar,
            StrategyArg::Ra => StrategyKind::Ra,
            StrategyArg::Laa => StrategyKind::Laa,
            StrategyArg::Lpa => StrategyKind::Lpa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Adam,
    Sgd,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(value: OptimizerArg) -> Self {
        match value {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuartilesArg {
    Inclusive,
    Exclusive,
}

impl From<QuartilesArg> for QuartileConvention {
    fn from(value: QuartilesArg) -> Self {
        match value {
            QuartilesArg::Inclusive => QuartileConvention::InclusiveMedian,
            QuartilesArg::Exclusive => QuartileConvention::ExclusiveMedian,
        }
    }
}

/// Optimizer override flags shared by the trial-based subcommands.
#[derive(Args)]
struct OptimizerFlags {
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    decay_rate: Option<f64>,
    #[arg(long)]
    decay_steps: Option<usize>,
    #[arg(long)]
    maxiter: Option<usize>,
}

impl OptimizerFlags {
    fn apply(&self, target: &mut ravqe::optimizer::OptimizerConfig) {
        if let Some(kind) = self.optimizer {
            target.kind = kind.into();
        }
        if let Some(v) = self.learning_rate {
            target.learning_rate = v;
        }
        if let Some(v) = self.decay_rate {
            target.decay_rate = v;
        }
        if let Some(v) = self.decay_steps {
            target.decay_steps = v;
        }
        if let Some(v) = self.maxiter {
            target.maxiter = v;
        }
    }
}

/// Activation-trigger override flags.
#[derive(Args)]
struct TriggerFlags {
    /// Switch the activation trigger to the energy-plateau detector with
    /// this relative tolerance.
    #[arg(long)]
    plateau_tolerance: Option<f64>,
    /// Trailing window of the plateau detector, in iterations.
    #[arg(long)]
    plateau_window: Option<usize>,
}

impl TriggerFlags {
    fn apply(&self, target: &mut Trigger) {
        if self.plateau_tolerance.is_some() || self.plateau_window.is_some() {
            *target = Trigger::Plateau {
                tolerance: self.plateau_tolerance.unwrap_or(1e-6),
                window: self.plateau_window.unwrap_or(50),
            };
        }
    }
}

#[derive(Args)]
struct VqeArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    jz: Option<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Activation rounds m (fraction 1/m per round).
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    trigger: TriggerFlags,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; the only source of randomness.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_stride: Option<usize>,
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long, value_enum)]
    quartiles: Option<QuartilesArg>,
    #[arg(long)]
    records_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    distribution_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    l_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    jz_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    strategies: Option<Vec<StrategyArg>>,
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    trigger: TriggerFlags,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_stride: Option<usize>,
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long, value_enum)]
    quartiles: Option<QuartilesArg>,
    #[arg(long)]
    records_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct BpVarianceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    jz: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    densities: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoisyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    l_values: Option<Vec<usize>>,
    #[arg(long)]
    jz: Option<f64>,
    /// Two-qubit depolarizing strength applied after every active gate.
    #[arg(long)]
    p_noise: Option<f64>,
    #[arg(long, value_delimiter = ',', value_enum)]
    strategies: Option<Vec<StrategyArg>>,
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    trigger: TriggerFlags,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_stride: Option<usize>,
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long, value_enum)]
    quartiles: Option<QuartilesArg>,
    #[arg(long)]
    records_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct TransitionArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    chain_lengths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    activation_ratios: Option<Vec<f64>>,
    /// Circuit layers; 0 selects the saturation default of 8 L.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also fit the correlation-length exponent to the curves.
    #[arg(long)]
    fit_nu: bool,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long)]
    nu_min: Option<f64>,
    #[arg(long)]
    nu_max: Option<f64>,
    #[arg(long)]
    nu_steps: Option<usize>,
    #[arg(long)]
    curves_out: Option<PathBuf>,
    #[arg(long)]
    collapse_out: Option<PathBuf>,
}

#[derive(Args)]
struct CollapseArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transition curves CSV produced by the transition subcommand.
    #[arg(long)]
    curves_in: Option<PathBuf>,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long)]
    nu_min: Option<f64>,
    #[arg(long)]
    nu_max: Option<f64>,
    #[arg(long)]
    nu_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Records JSON-lines file produced by vqe, sweep, or noisy.
    #[arg(long)]
    records_in: Option<PathBuf>,
    #[arg(long)]
    success_threshold: Option<f64>,
    #[arg(long, value_enum)]
    quartiles: Option<QuartilesArg>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    distribution_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| std::env::var("RAVQE_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(workers) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build_global() {
            eprintln!("failed to configure {workers} workers: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli.command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} trial(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<usize> {
    match command {
        Command::Vqe(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_vqe(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.n {
                config.n = v;
            }
            if let Some(v) = args.l {
                config.l = v;
            }
            if let Some(v) = args.jz {
                config.jz = v;
            }
            if let Some(v) = args.strategy {
                config.strategy.kind = v.into();
            }
            if let Some(v) = args.m {
                config.strategy.m = v;
            }
            args.trigger.apply(&mut config.strategy.trigger);
            args.optimizer.apply(&mut config.optimizer);
            if let Some(v) = args.trials {
                config.trials = v;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.record_stride {
                config.record_stride = v;
            }
            if let Some(v) = args.success_threshold {
                config.success_threshold = v;
            }
            if let Some(v) = args.quartiles {
                config.quartiles = v.into();
            }
            if let Some(v) = args.records_out {
                config.records_out = v;
            }
            if let Some(v) = args.summary_out {
                config.summary_out = v;
            }
            if let Some(v) = args.distribution_out {
                config.distribution_out = v;
            }
            run::cmd_vqe(config)
        }
        Command::Sweep(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_sweep(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.n {
                config.n = v;
            }
            if let Some(v) = args.l_values {
                config.l_values = v;
            }
            if let Some(v) = args.jz_values {
                config.jz_values = v;
            }
            if let Some(v) = args.strategies {
                config.strategies = v.into_iter().map(Into::into).collect();
            }
            if let Some(v) = args.m {
                config.m = v;
            }
            args.trigger.apply(&mut config.trigger);
            args.optimizer.apply(&mut config.optimizer);
            if let Some(v) = args.trials {
                config.trials = v;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.record_stride {
                config.record_stride = v;
            }
            if let Some(v) = args.success_threshold {
                config.success_threshold = v;
            }
            if let Some(v) = args.quartiles {
                config.quartiles = v.into();
            }
            if let Some(v) = args.records_out {
                config.records_out = v;
            }
            if let Some(v) = args.summary_out {
                config.summary_out = v;
            }
            run::cmd_sweep(config)
        }
        Command::BpVariance(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_bp_variance(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.n_values {
                config.n_values = v;
            }
            if let Some(v) = args.l {
                config.l = v;
            }
            if let Some(v) = args.jz {
                config.jz = v;
            }
            if let Some(v) = args.densities {
                config.densities = v;
            }
            if let Some(v) = args.samples {
                config.samples = v;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.out {
                config.out = v;
            }
            run::cmd_bp_variance(config)
        }
        Command::Noisy(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_noisy(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.n {
                config.n = v;
            }
            if let Some(v) = args.l_values {
                config.l_values = v;
            }
            if let Some(v) = args.jz {
                config.jz = v;
            }
            if let Some(v) = args.p_noise {
                config.p_noise = v;
            }
            if let Some(v) = args.strategies {
                config.strategies = v.into_iter().map(Into::into).collect();
            }
            if let Some(v) = args.m {
                config.m = v;
            }
            args.trigger.apply(&mut config.trigger);
            args.optimizer.apply(&mut config.optimizer);
            if let Some(v) = args.trials {
                config.trials = v;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.record_stride {
                config.record_stride = v;
            }
            if let Some(v) = args.success_threshold {
                config.success_threshold = v;
            }
            if let Some(v) = args.quartiles {
                config.quartiles = v.into();
            }
            if let Some(v) = args.records_out {
                config.records_out = v;
            }
            if let Some(v) = args.summary_out {
                config.summary_out = v;
            }
            run::cmd_noisy(config)
        }
        Command::Transition(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_transition(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.chain_lengths {
                config.chain_lengths = v;
            }
            if let Some(v) = args.activation_ratios {
                config.activation_ratios = v;
            }
            if let Some(v) = args.blocks {
                config.blocks = v;
            }
            if let Some(v) = args.samples {
                config.samples = v;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if args.fit_nu {
                config.fit_nu = true;
            }
            if let Some(v) = args.p_c {
                config.p_c = v;
            }
            if let Some(v) = args.nu_min {
                config.nu_min = v;
            }
            if let Some(v) = args.nu_max {
                config.nu_max = v;
            }
            if let Some(v) = args.nu_steps {
                config.nu_steps = v;
            }
            if let Some(v) = args.curves_out {
                config.curves_out = v;
            }
            if let Some(v) = args.collapse_out {
                config.collapse_out = v;
            }
            run::cmd_transition(config)
        }
        Command::Collapse(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_collapse(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.curves_in {
                config.curves_in = v;
            }
            if let Some(v) = args.p_c {
                config.p_c = v;
            }
            if let Some(v) = args.nu_min {
                config.nu_min = v;
            }
            if let Some(v) = args.nu_max {
                config.nu_max = v;
            }
            if let Some(v) = args.nu_steps {
                config.nu_steps = v;
            }
            if let Some(v) = args.out {
                config.out = v;
            }
            run::cmd_collapse(config)
        }
        Command::Stats(args) => {
            let mut config = match &args.config {
                Some(path) => config::expect_stats(load_config(path)?)?,
                None => Default::default(),
            };
            if let Some(v) = args.records_in {
                config.records_in = v;
            }
            if let Some(v) = args.success_threshold {
                config.success_threshold = v;
            }
            if let Some(v) = args.quartiles {
                config.quartiles = v.into();
            }
            if let Some(v) = args.summary_out {
                config.summary_out = v;
            }
            if let Some(v) = args.distribution_out {
                config.distribution_out = v;
            }
            run::cmd_stats(config)
        }
    }
}
