//! Experiment subcommand implementations.

use std::collections::BTreeMap;


use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ravqe::backend::Backend;
use ravqe::collapse::{data_collapse, nu_grid};
use ravqe::harness::{run_single_trial, summarize_with, SummaryRow, TrialBatchConfig, TrialRecord};
use ravqe::harness::{gradient_variance_experiment, VarianceExperimentConfig};
use ravqe::observable::Observable;
use ravqe::schedule::Strategy;
use ravqe::seed::derive_seed;
use ravqe::stabilizer::{run_transition, TransitionConfig, TransitionCurve};
use ravqe::stats::{accumulated_distribution, relative_error};

use crate::config::{
    BpVarianceConfig, CollapseConfig, NoisyConfig, StatsConfig, SweepConfig, TransitionRunConfig, VqeConfig,
};
use crate::output::{read_csv, read_jsonl, write_csv, write_json, write_jsonl};

/// A failed trial inside an otherwise completed batch.
#[derive(Debug, Clone, Serialize)]
pub struct TrialFailure {
    pub trial_index: usize,
    pub error: String,
}

/// Run a batch, keeping per-trial failures instead of aborting the batch.
fn run_batch(batch: &TrialBatchConfig) -> Result<(Vec<TrialRecord>, Vec<TrialFailure>)> {
    batch.validate().map_err(|e| anyhow::anyhow!("invalid batch configuration: {e}"))?;
    let outcomes: Vec<(usize, ravqe::Result<TrialRecord>)> =
        (0..batch.trials).into_par_iter().map(|i| (i, run_single_trial(batch, i))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (index, outcome) in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => failures.push(TrialFailure { trial_index: index, error: e.to_string() }),
        }
    }
    Ok((records, failures))
}

fn report_failures(failures: &[TrialFailure]) {
    for f in failures {
        eprintln!("trial {} failed: {}", f.trial_index, f.error);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionRow {
    energy: f64,
    cumulative_fraction: f64,
    relative_error: f64,
}

fn distribution_rows(finals: &[f64], exact: f64) -> Result<Vec<DistributionRow>> {
    Ok(accumulated_distribution(finals)?
        .into_iter()
        .map(|(energy, cumulative_fraction)| DistributionRow {
            energy,
            cumulative_fraction,
            relative_error: relative_error(energy, exact).unwrap_or(f64::NAN),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// vqe
// ---------------------------------------------------------------------------

pub fn cmd_vqe(config: VqeConfig) -> Result<usize> {
    let batch = TrialBatchConfig {
        n: config.n,
        l: config.l,
        jz: config.jz,
        strategy: config.strategy,
        optimizer: config.optimizer,
        backend: Backend::Exact,
        trials: config.trials,
        master_seed: config.seed,
        record_stride: config.record_stride,
    };
    let (records, failures) = run_batch(&batch)?;
    report_failures(&failures);
    write_jsonl(&config.records_out, "vqe", &config, &records)?;
    if !records.is_empty() {
        let exact = Observable::xxz_chain(config.n, config.jz)?.exact_ground_energy()?;
        let summary =
            summarize_with(&records, exact, config.success_threshold, config.quartiles)?;
        write_csv(&config.summary_out, "vqe", &config, std::slice::from_ref(&summary))?;
        let finals: Vec<f64> = records.iter().map(|r| r.final_energy).collect();
        let rows = distribution_rows(&finals, exact)?;
        write_csv(&config.distribution_out, "vqe", &config, &rows)?;
        println!(
            "vqe: {} trials, mean {:.6}, median {:.6}, best {:.6}, exact {:.6} -> {}, {}, {}",
            records.len(),
            summary.mean,
            summary.median,
            summary.best,
            exact,
            config.records_out.display(),
            config.summary_out.display(),
            config.distribution_out.display(),
        );
    }
    Ok(failures.len())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub fn cmd_sweep(config: SweepConfig) -> Result<usize> {
    let mut all_records = Vec::new();
    let mut summaries = Vec::new();
    let mut failure_count = 0usize;
    let mut cell = 0u64;
    for &kind in &config.strategies {
        for &l in &config.l_values {
            for &jz in &config.jz_values {
                let batch = TrialBatchConfig {
                    n: config.n,
                    l,
                    jz,
                    strategy: Strategy { kind, m: config.m, trigger: config.trigger },
                    optimizer: config.optimizer,
                    backend: Backend::Exact,
                    trials: config.trials,
                    master_seed: derive_seed(config.seed, cell, "sweep-cell"),
                    record_stride: config.record_stride,
                };
                cell += 1;
                let (records, failures) = run_batch(&batch)?;
                report_failures(&failures);
                failure_count += failures.len();
                if !records.is_empty() {
                    let exact = Observable::xxz_chain(config.n, jz)?.exact_ground_energy()?;
                    summaries.push(summarize_with(
                        &records,
                        exact,
                        config.success_threshold,
                        config.quartiles,
                    )?);
                }
                all_records.extend(records);
            }
        }
    }
    write_jsonl(&config.records_out, "sweep", &config, &all_records)?;
    write_csv(&config.summary_out, "sweep", &config, &summaries)?;
    println!(
        "sweep: {} cells, {} records -> {}, {}",
        summaries.len(),
        all_records.len(),
        config.records_out.display(),
        config.summary_out.display()
    );
    Ok(failure_count)
}

// ---------------------------------------------------------------------------
// bp-variance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarianceRow {
    n: usize,
    l: usize,
    jz: f64,
    density: f64,
    samples: usize,
    mean_variance: f64,
    stderr: f64,
    components: usize,
}

pub fn cmd_bp_variance(config: BpVarianceConfig) -> Result<usize> {
    let mut rows = Vec::new();
    for (idx, &n) in config.n_values.iter().enumerate() {
        let experiment = VarianceExperimentConfig {
            n,
            l: config.l,
            jz: config.jz,
            densities: config.densities.clone(),
            samples: config.samples,
            master_seed: derive_seed(config.seed, idx as u64, "bp-size"),
        };
        for estimate in gradient_variance_experiment(&experiment)? {
            rows.push(VarianceRow {
                n,
                l: config.l,
                jz: config.jz,
                density: estimate.density,
                samples: estimate.samples,
                mean_variance: estimate.mean_variance,
                stderr: estimate.stderr,
                components: estimate.components,
            });
        }
    }
    write_csv(&config.out, "bp-variance", &config, &rows)?;
    println!("bp-variance: {} rows -> {}", rows.len(), config.out.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// noisy
// ---------------------------------------------------------------------------

pub fn cmd_noisy(config: NoisyConfig) -> Result<usize> {
    let mut all_records = Vec::new();
    let mut summaries = Vec::new();
    let mut failure_count = 0usize;
    let mut cell = 0u64;
    let exact = Observable::xxz_chain(config.n, config.jz)?.exact_ground_energy()?;
    for &kind in &config.strategies {
        for &l in &config.l_values {
            let batch = TrialBatchConfig {
                n: config.n,
                l,
                jz: config.jz,
                strategy: Strategy { kind, m: config.m, trigger: config.trigger },
                optimizer: config.optimizer,
                backend: Backend::Depolarizing { p_noise: config.p_noise },
                trials: config.trials,
                master_seed: derive_seed(config.seed, cell, "noisy-cell"),
                record_stride: config.record_stride,
            };
            cell += 1;
            let (records, failures) = run_batch(&batch)?;
            report_failures(&failures);
            failure_count += failures.len();
            if !records.is_empty() {
                summaries.push(summarize_with(
                    &records,
                    exact,
                    config.success_threshold,
                    config.quartiles,
                )?);
            }
            all_records.extend(records);
        }
    }
    write_jsonl(&config.records_out, "noisy", &config, &all_records)?;
    write_csv(&config.summary_out, "noisy", &config, &summaries)?;
    println!(
        "noisy: {} cells at p_noise = {} -> {}, {}",
        summaries.len(),
        config.p_noise,
        config.records_out.display(),
        config.summary_out.display()
    );
    Ok(failure_count)
}

// ---------------------------------------------------------------------------
// transition
// ---------------------------------------------------------------------------

pub fn cmd_transition(config: TransitionRunConfig) -> Result<usize> {
    let mut curves = Vec::new();
    let mut point = 0u64;
    for &len in &config.chain_lengths {
        for &ratio in &config.activation_ratios {
            let blocks = if config.blocks == 0 { 8 * len } else { config.blocks };
            let cell = TransitionConfig {
                chain_length: len,
                activation_ratio: ratio,
                blocks,
                samples: config.samples,
                initial_state: config.initial_state,
            };
            curves.push(run_transition(&cell, derive_seed(config.seed, point, "transition-point"))?);
            point += 1;
        }
    }
    write_csv(&config.curves_out, "transition", &config, &curves)?;
    println!("transition: {} points -> {}", curves.len(), config.curves_out.display());
    if config.fit_nu {
        let grid = nu_grid(config.nu_min, config.nu_max, config.nu_steps);
        let fit = data_collapse(&curves, config.p_c, &grid)?;
        write_json(&config.collapse_out, "transition", &config, "collapse", &fit)?;
        println!(
            "collapse: nu = {:.3}, cost = {:.6e}{} -> {}",
            fit.nu,
            fit.cost,
            if fit.flat { " (flat profile: no collapse information)" } else { "" },
            config.collapse_out.display()
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// collapse
// ---------------------------------------------------------------------------

pub fn cmd_collapse(config: CollapseConfig) -> Result<usize> {
    let curves: Vec<TransitionCurve> = read_csv(&config.curves_in)
        .with_context(|| format!("reading transition curves from {}", config.curves_in.display()))?;
    if curves.is_empty() {
        bail!("no curves found in {}", config.curves_in.display());
    }
    let grid = nu_grid(config.nu_min, config.nu_max, config.nu_steps);
    let fit = data_collapse(&curves, config.p_c, &grid)?;
    write_json(&config.out, "collapse", &config, "collapse", &fit)?;
    println!(
        "collapse: nu = {:.3}, cost = {:.6e}{} -> {}",
        fit.nu,
        fit.cost,
        if fit.flat { " (flat profile: no collapse information)" } else { "" },
        config.out.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

pub fn cmd_stats(config: StatsConfig) -> Result<usize> {
    let records: Vec<TrialRecord> = read_jsonl(&config.records_in)?;
    if records.is_empty() {
        bail!("no records found in {}", config.records_in.display());
    }
    // group records into cells by (strategy, n, l, jz)
    let mut cells: BTreeMap<(String, usize, usize, u64), Vec<TrialRecord>> = BTreeMap::new();
    for record in records {
        let key = (record.strategy.kind.to_string(), record.n, record.l, record.jz.to_bits());
        cells.entry(key).or_default().push(record);
    }
    let mut summaries: Vec<SummaryRow> = Vec::new();
    let mut distributions = Vec::new();
    for batch in cells.values() {
        let exact = Observable::xxz_chain(batch[0].n, batch[0].jz)?.exact_ground_energy()?;
        summaries.push(summarize_with(batch, exact, config.success_threshold, config.quartiles)?);
        let finals: Vec<f64> = batch.iter().map(|r| r.final_energy).collect();
        for row in distribution_rows(&finals, exact)? {
            distributions.push(CellDistributionRow {
                strategy: batch[0].strategy.kind.to_string(),
                n: batch[0].n,
                l: batch[0].l,
                jz: batch[0].jz,
                energy: row.energy,
                cumulative_fraction: row.cumulative_fraction,
                relative_error: row.relative_error,
            });
        }
    }
    write_csv(&config.summary_out, "stats", &config, &summaries)?;
    write_csv(&config.distribution_out, "stats", &config, &distributions)?;
    println!(
        "stats: {} cells -> {}, {}",
        summaries.len(),
        config.summary_out.display(),
        config.distribution_out.display()
    );
    Ok(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CellDistributionRow {
    strategy: String,
    n: usize,
    l: usize,
    jz: f64,
    energy: f64,
    cumulative_fraction: f64,
    relative_error: f64,
}
