use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::stats::{aggregate, checkpoints, CellResult, SweepResult};
use super::RunConfig;
use crate::bounds::c_infinity;
use crate::engine::{run_trial_with, trial_seed, TrialOptions, TrialSummary};
use crate::error::{Error, Result};
use crate::geometry::GameParams;
use crate::policy::StrategyConfig;

pub const CSV_HEADER: &str = "T,w,checkpoint_t,mean,stderr,n_trials,c_inf";

fn log_name(period: f64, weight: f64, index: usize) -> String {
    format!("trial_T{period}_w{weight}_{index:04}.json")
}

/// Runs `config.trials` trials of one (period, weight) pair on the current
/// rayon pool. Trial `i` uses seed `trial_seed(master, i)`, so every pair
/// sees the same arrival streams.
pub fn run_cell(params: &GameParams, strategy: StrategyConfig, config: &RunConfig, c_inf: f64) -> Result<CellResult> {
    let log_dir = config.output_dir.join("logs");
    if config.emit_trajectories {
        fs::create_dir_all(&log_dir).map_err(|e| Error::io(&log_dir, e))?;
    }
    let summaries: Vec<TrialSummary> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let options = TrialOptions {
                emit_trajectories: config.emit_trajectories,
                master_seed: Some(config.master_seed),
                trial_index: Some(i as u64),
                ..TrialOptions::default()
            };
            let seed = trial_seed(config.master_seed, i as u64);
            let record = run_trial_with(params, &strategy, config.horizon, seed, &options, None)?;
            if config.emit_trajectories {
                record.write_json(&log_dir.join(log_name(params.period(), strategy.weight, i)))?;
            }
            Ok(record.summary())
        })
        .collect::<Result<_>>()?;
    aggregate(&summaries, &checkpoints(config.horizon), c_inf)
}

fn bound_or_nan(params: &GameParams) -> f64 {
    match c_infinity(params) {
        Ok((c, _)) => c,
        Err(e) => {
            log::warn!("no bound for T = {}: {e}", params.period());
            f64::NAN
        }
    }
}

/// Every (period, weight) pair, periods outermost.
pub fn run_grid(config: &RunConfig, periods: &[f64]) -> Result<SweepResult> {
    let params = config.validate(periods)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::config("threads", &config.threads.to_string(), e.to_string()))?;
    let mut cells = Vec::with_capacity(params.len() * config.weights.len());
    for p in &params {
        let c_inf = bound_or_nan(p);
        for &w in &config.weights {
            let strategy = StrategyConfig::new(w, config.objective)?;
            let cell = pool.install(|| run_cell(p, strategy, config, c_inf))?;
            log::info!(
                "T = {} w = {w}: final fraction {:.4} +- {:.4} over {} trials",
                p.period(),
                cell.final_mean,
                cell.final_stderr,
                cell.n_trials
            );
            cells.push(cell);
        }
    }
    Ok(SweepResult {
        horizon: config.horizon,
        master_seed: config.master_seed,
        checkpoints: checkpoints(config.horizon),
        cells,
    })
}

/// Renders the results table. With `final_only`, each pair contributes a
/// single row at the horizon.
pub fn render_csv(result: &SweepResult, final_only: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in &result.cells {
        let points = if final_only {
            &cell.curve[cell.curve.len().saturating_sub(1)..]
        } else {
            &cell.curve[..]
        };
        for pt in points {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
                cell.period, cell.weight, pt.t, pt.mean, pt.stderr, cell.n_trials, cell.c_inf
            );
        }
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path, final_only: bool) -> Result<()> {
    fs::write(path, render_csv(result, final_only)).map_err(|e| Error::io(path, e))
}
