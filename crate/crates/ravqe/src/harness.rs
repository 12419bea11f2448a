//! Batched trial execution and the gradient-variance experiment.
//!
//! Trials are independent: trial `i` derives its own seed from the master
//! seed, so record sets are identical (in trial order) for any worker count.
//! Every trial counts expectation evaluations under the parameter-shift
//! accounting model — two per active slot per iteration — even when the
//! gradient actually comes from the adjoint sweep; the counter is the
//! hardware-cost proxy.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::density::DENSITY_QUBIT_LIMIT;
use crate::error::{Error, Result};
use crate::gradient::{parameter_shift_gradient, reverse_sweep_gradient};
use crate::layout::CircuitLayout;
use crate::observable::Observable;
use crate::optimizer::{OptimizerConfig, OptimizerState};
use crate::schedule::{init_schedule, ActivationPlanner, Strategy};
use crate::seed::derive_seed;
use crate::state::StateVector;
use crate::stats::{box_stats, relative_error, BoxStats, QuartileConvention};

/// Configuration of one batch of identical, independently seeded trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchConfig {
    pub n: usize,
    pub l: usize,
    pub jz: f64,
    pub strategy: Strategy,
    pub optimizer: OptimizerConfig,
    pub backend: Backend,
    pub trials: usize,
    pub master_seed: u64,
    /// Trajectory recording stride in iterations.
    pub record_stride: usize,
}

impl TrialBatchConfig {
    pub fn validate(&self) -> Result<()> {
        CircuitLayout::build(self.n, self.l)?;
        self.strategy.validate()?;
        self.optimizer.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("at least one trial is required".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record stride must be nonzero".into()));
        }
        if let Backend::Depolarizing { p_noise } = self.backend {
            if !(0.0..=1.0).contains(&p_noise) {
                return Err(Error::NoiseStrengthOutOfRange { p: p_noise });
            }
            if self.n > DENSITY_QUBIT_LIMIT {
                return Err(Error::TooManyQubits { n: self.n, max: DENSITY_QUBIT_LIMIT });
            }
        }
        let rounds = self.strategy.total_rounds(self.l);
        if self.optimizer.maxiter < rounds {
            return Err(Error::MaxiterTooSmall { maxiter: self.optimizer.maxiter, stages: rounds });
        }
        Ok(())
    }
}

/// One gate-activation event in a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationEvent {
    pub iteration: usize,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Active slot count after the event.
    pub active_slots: usize,
}

/// Energy at a recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub energy: f64,
}

/// Full record of a single optimization trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub strategy: Strategy,
    pub n: usize,
    pub l: usize,
    /// Parameter count `3 n l`.
    pub p: usize,
    pub jz: f64,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub backend: Backend,
    pub trajectory: Vec<TrajectoryPoint>,
    pub final_energy: f64,
    pub activation_events: Vec<ActivationEvent>,
    /// Expectation evaluations under the parameter-shift accounting model.
    pub shift_evaluations: u64,
    /// Wall time of the trial; excluded from serialized records so rerun
    /// outputs stay byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Run all trials of a batch. Rayon splits the batch across the current
/// thread pool; every trial derives its own seed, so the record list is
/// independent of the worker count.
pub fn run_trials(config: &TrialBatchConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|index| run_single_trial(config, index))
        .collect()
}

/// Run trial `index` of a batch.
pub fn run_single_trial(config: &TrialBatchConfig, index: usize) -> Result<TrialRecord> {
    let started = Instant::now();
    let layout = CircuitLayout::build(config.n, config.l)?;
    let obs = Observable::xxz_chain(config.n, config.jz)?;
    let seed = derive_seed(config.master_seed, index as u64, "trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut params, _, mut sched) = init_schedule(&config.strategy, &layout, &mut rng)?;
    let mut planner =
        ActivationPlanner::new(config.strategy.trigger, config.optimizer.maxiter, sched.total_rounds())?;
    let mut opt_state = OptimizerState::new(layout.slot_count());
    let init_state = StateVector::singlet_chain(config.n)?;

    let mut energies = Vec::with_capacity(config.optimizer.maxiter);
    let mut trajectory = Vec::new();
    let mut events = Vec::new();
    let mut shift_evaluations = 0u64;

    for iter in 0..config.optimizer.maxiter {
        if !sched.fully_active() && planner.should_fire(iter, &energies) {
            let energy_before = config.backend.energy(&layout, &params, sched.mask(), &obs)?;
            sched.advance(&config.strategy, &params)?;
            let energy_after = config.backend.energy(&layout, &params, sched.mask(), &obs)?;
            events.push(ActivationEvent {
                iteration: iter,
                energy_before,
                energy_after,
                active_slots: sched.mask().active_count(),
            });
        }
        let active = sched.mask().active_count() as u64;
        let (energy, grad) = match config.backend {
            Backend::Exact => {
                shift_evaluations += 2 * active;
                reverse_sweep_gradient(&layout, &params, sched.mask(), &obs, &init_state)?
            }
            backend @ Backend::Depolarizing { .. } => {
                let shift = parameter_shift_gradient(backend, &layout, &params, sched.mask(), &obs)?;
                shift_evaluations += shift.evaluations;
                (shift.energy, shift.gradient)
            }
        };
        if iter % config.record_stride == 0 {
            trajectory.push(TrajectoryPoint { iteration: iter, energy });
        }
        energies.push(energy);
        opt_state.step(&config.optimizer, &mut params, &grad, sched.mask())?;
    }
    let final_energy = config.backend.energy(&layout, &params, sched.mask(), &obs)?;

    Ok(TrialRecord {
        trial_index: index,
        strategy: config.strategy,
        n: config.n,
        l: config.l,
        p: layout.slot_count(),
        jz: config.jz,
        seed,
        optimizer: config.optimizer,
        backend: config.backend,
        trajectory,
        final_energy,
        activation_events: events,
        shift_evaluations,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Summary of one strategy cell, ready for a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub n: usize,
    pub l: usize,
    pub jz: f64,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub best: f64,
    pub exact_energy: f64,
    /// Fraction of trials within `success_threshold` relative error of the
    /// exact ground energy.
    pub success_fraction: f64,
}

/// Box statistics over the final energies of a record batch.
pub fn final_energy_stats(records: &[TrialRecord]) -> Result<BoxStats> {
    let finals: Vec<f64> = records.iter().map(|r| r.final_energy).collect();
    box_stats(&finals)
}

/// Summarize a batch against the exact ground energy, using the default
/// inclusive-median quartiles.
pub fn summarize(records: &[TrialRecord], exact_energy: f64, success_threshold: f64) -> Result<SummaryRow> {
    summarize_with(records, exact_energy, success_threshold, QuartileConvention::InclusiveMedian)
}

/// Summarize a batch under an explicit quartile convention.
pub fn summarize_with(
    records: &[TrialRecord],
    exact_energy: f64,
    success_threshold: f64,
    convention: QuartileConvention,
) -> Result<SummaryRow> {
    if records.is_empty() {
        return Err(Error::EmptyInput { context: "summary of an empty record batch" });
    }
    let finals: Vec<f64> = records.iter().map(|r| r.final_energy).collect();
    let stats = crate::stats::box_stats_with(&finals, convention)?;
    let mut successes = 0usize;
    for r in records {
        if relative_error(r.final_energy, exact_energy)?.abs() <= success_threshold {
            successes += 1;
        }
    }
    let first = &records[0];
    Ok(SummaryRow {
        strategy: first.strategy.kind.to_string(),
        n: first.n,
        l: first.l,
        jz: first.jz,
        trials: records.len(),
        mean: stats.mean,
        median: stats.median,
        q1: stats.q1,
        q3: stats.q3,
        lower_fence: stats.lower_fence,
        upper_fence: stats.upper_fence,
        best: stats.min,
        exact_energy,
        success_fraction: successes as f64 / records.len() as f64,
    })
}

/// Result of the gradient-variance experiment at one activation density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub density: f64,
    pub samples: usize,
    /// Occurrence-weighted average of per-component gradient variances.
    pub mean_variance: f64,
    /// Weighted standard error over components.
    pub stderr: f64,
    /// Components with at least two occurrences.
    pub components: usize,
}

/// Configuration of the gradient-variance (trainability) experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceExperimentConfig {
    pub n: usize,
    pub l: usize,
    pub jz: f64,
    pub densities: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
}

/// Estimate the averaged gradient variance per activation density.
///
/// Per sample: draw a fresh Bernoulli(density) mask, random angles on the
/// active slots, and take the exact gradient. Across samples, each flat slot
/// contributes the variance of its gradient component over the samples where
/// it was active; the estimate averages component variances weighted by
/// occurrence count.
pub fn gradient_variance_experiment(config: &VarianceExperimentConfig) -> Result<Vec<VarianceEstimate>> {
    let layout = CircuitLayout::build(config.n, config.l)?;
    let obs = Observable::xxz_chain(config.n, config.jz)?;
    if config.samples < 2 {
        return Err(Error::InvalidConfig("variance estimation needs at least 2 samples".into()));
    }
    for &d in &config.densities {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::InvalidConfig(format!("activation density must lie in (0, 1], got {d}")));
        }
    }
    let init_state = StateVector::singlet_chain(config.n)?;
    let p = layout.slot_count();

    let mut results = Vec::with_capacity(config.densities.len());
    for (density_index, &density) in config.densities.iter().enumerate() {
        let gradients: Vec<(Vec<bool>, Vec<f64>)> = (0..config.samples)
            .into_par_iter()
            .map(|sample| -> Result<(Vec<bool>, Vec<f64>)> {
                let seed = derive_seed(
                    config.master_seed,
                    (density_index * config.samples + sample) as u64,
                    "bp-variance",
                );
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut params = crate::layout::ParameterVector::zeros(p);
                let mut mask = crate::layout::ActivationMask::all_inactive(p);
                use rand::Rng;
                for idx in 0..p {
                    if rng.gen_bool(density) {
                        mask.activate(idx);
                        params[idx] = rng.gen::<f64>() * std::f64::consts::TAU;
                    }
                }
                let (_, grad) = reverse_sweep_gradient(&layout, &params, &mask, &obs, &init_state)?;
                Ok((mask.flags().to_vec(), grad.values().to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;

        // per-component variance across the samples where the slot was active
        let mut weighted_sum = 0.0;
        let mut weight_total = 0.0;
        let mut component_variances = Vec::new();
        for idx in 0..p {
            let values: Vec<f64> = gradients
                .iter()
                .filter(|(flags, _)| flags[idx])
                .map(|(_, g)| g[idx])
                .collect();
            if values.len() < 2 {
                continue;
            }
            let count = values.len() as f64;
            let mean = values.iter().sum::<f64>() / count;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
            weighted_sum += count * var;
            weight_total += count;
            component_variances.push((count, var));
        }
        if component_variances.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "density {density} produced no component with two occurrences; raise the sample count"
            )));
        }
        let mean_variance = weighted_sum / weight_total;
        let spread = component_variances
            .iter()
            .map(|&(w, v)| w * (v - mean_variance).powi(2))
            .sum::<f64>()
            / weight_total;
        let stderr = (spread / component_variances.len() as f64).sqrt();
        results.push(VarianceEstimate {
            density,
            samples: config.samples,
            mean_variance,
            stderr,
            components: component_variances.len(),
        });
    }
    Ok(results)
}
