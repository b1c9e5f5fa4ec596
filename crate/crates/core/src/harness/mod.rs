//! Monte Carlo orchestration, statistics and file output.

pub mod cli;
mod run;
mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engagement::Objective;
use crate::error::{Error, Result};
use crate::geometry::{GameParams, RawParams};

pub use run::{render_csv, run_cell, run_grid, write_csv, CSV_HEADER};
pub use stats::{aggregate, checkpoints, mean_and_stderr, CellResult, CurvePoint, SweepResult};

pub const DEFAULT_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Everything a batch run needs. Built from defaults, then a key=value file,
/// then command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Game parameters; `period` here is ignored in favour of `periods`.
    pub params: RawParams,
    pub weights: Vec<f64>,
    /// `None` means the subcommand's own default list.
    pub periods: Option<Vec<f64>>,
    pub horizon: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub objective: Objective,
    pub output_dir: PathBuf,
    pub emit_trajectories: bool,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: RawParams::default(),
            weights: DEFAULT_WEIGHTS.to_vec(),
            periods: None,
            horizon: 1e4,
            trials: 100,
            master_seed: 1,
            objective: Objective::MinTime,
            output_dir: PathBuf::from("out"),
            emit_trajectories: false,
            threads: 0,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::config(key, value, e.to_string()))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::config(key, value, "expected true or false")),
    }
}

pub fn parse_objective(value: &str) -> Result<Objective> {
    match value.trim() {
        "min_time" | "min-time" => Ok(Objective::MinTime),
        "min_distance" | "min-distance" => Ok(Objective::MinDistance),
        _ => Err(Error::config("objective", value, "expected min_time or min_distance")),
    }
}

impl RunConfig {
    /// Sets one option by name. Keys match the long command-line flags with
    /// dashes replaced by underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key.replace('-', "_").as_str() {
            "rt" => self.params.target_radius = parse_f64(key, value)?,
            "rhoa" => self.params.sensing_radius = parse_f64(key, value)?,
            "rhot" => self.params.tsr_width = parse_f64(key, value)?,
            "nu" => self.params.speed_ratio = parse_f64(key, value)?,
            "period" => self.periods = Some(parse_list(key, value)?),
            "horizon" => self.horizon = parse_f64(key, value)?,
            "trials" => {
                self.trials = value
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| Error::config(key, value, e.to_string()))?
            }
            "w" => self.weights = parse_list(key, value)?,
            "seed" => {
                self.master_seed = value
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| Error::config(key, value, e.to_string()))?
            }
            "objective" => self.objective = parse_objective(value)?,
            "out" => self.output_dir = PathBuf::from(value.trim()),
            "emit_trajectories" => self.emit_trajectories = parse_bool(key, value)?,
            "threads" => {
                self.threads = value
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| Error::config(key, value, e.to_string()))?
            }
            _ => return Err(Error::config(key, value, "unknown key")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and lines starting
    /// with `#` are skipped; later keys override earlier ones.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    &format!("line {}", n + 1),
                    line,
                    "expected key = value",
                ));
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn periods_or(&self, fallback: &[f64]) -> Vec<f64> {
        self.periods.clone().unwrap_or_else(|| fallback.to_vec())
    }

    /// Checks the invariants and returns validated parameters for each period.
    pub fn validate(&self, periods: &[f64]) -> Result<Vec<GameParams>> {
        if self.trials < 1 {
            return Err(Error::config("trials", &self.trials.to_string(), "need at least one trial"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", &self.horizon.to_string(), "must be positive and finite"));
        }
        if self.weights.is_empty() {
            return Err(Error::config("w", "", "empty list"));
        }
        for &w in &self.weights {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::config("w", &w.to_string(), "weights lie in [0, 1]"));
            }
        }
        periods
            .iter()
            .map(|&period| GameParams::try_from(RawParams { period, ..self.params }))
            .collect()
    }
}
