use serde::{Deserialize, Serialize};

use crate::engagement::Objective;
use crate::engine::TrialSummary;
use crate::error::{Error, Result};

const PER_DECADE: f64 = 20.0;
const FIRST_CHECKPOINT: f64 = 10.0;

/// Log-spaced checkpoint times from 10 to `horizon`, 20 per decade, always
/// ending exactly at the horizon.
pub fn checkpoints(horizon: f64) -> Vec<f64> {
    if horizon.is_nan() || horizon <= FIRST_CHECKPOINT {
        return vec![horizon];
    }
    let decades = (horizon / FIRST_CHECKPOINT).log10();
    let steps = (decades * PER_DECADE + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=steps)
        .map(|i| FIRST_CHECKPOINT * 10f64.powf(i as f64 / PER_DECADE))
        .collect();
    let last = out.last_mut().unwrap();
    if (*last - horizon).abs() <= 1e-9 * horizon || *last > horizon {
        *last = horizon;
    } else {
        out.push(horizon);
    }
    out
}

/// Mean and standard error of the mean. Values are summed in sorted order,
/// so the result does not depend on the order of `values`.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Statistics for one (period, weight) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub period: f64,
    pub weight: f64,
    pub objective: Objective,
    pub n_trials: usize,
    /// Capture fraction at the horizon, per trial in trial-index order.
    pub finals: Vec<f64>,
    pub final_mean: f64,
    pub final_stderr: f64,
    /// Captured over resolved intruders, per trial.
    pub resolved: Vec<f64>,
    pub resolved_mean: f64,
    pub curve: Vec<CurvePoint>,
    pub anomalies: usize,
    pub c_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub horizon: f64,
    pub master_seed: u64,
    pub checkpoints: Vec<f64>,
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn cell(&self, period: f64, weight: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.period == period && c.weight == weight)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-checkpoint statistics over trials that share parameters and strategy.
/// `c_inf` is carried through for output and not checked here.
pub fn aggregate(trials: &[TrialSummary], checkpoints: &[f64], c_inf: f64) -> Result<CellResult> {
    let first = trials.first().ok_or(Error::MixedConfig)?;
    if trials.iter().any(|t| t.params != first.params || t.strategy != first.strategy) {
        return Err(Error::MixedConfig);
    }
    let curve = checkpoints
        .iter()
        .map(|&t| {
            let values: Vec<f64> = trials.iter().map(|s| s.fraction_at(t)).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            CurvePoint { t, mean, stderr }
        })
        .collect();
    let finals: Vec<f64> = trials.iter().map(TrialSummary::final_fraction).collect();
    let (final_mean, final_stderr) = mean_and_stderr(&finals);
    let resolved: Vec<f64> = trials.iter().map(TrialSummary::resolved_fraction).collect();
    Ok(CellResult {
        period: first.params.period(),
        weight: first.strategy.weight,
        objective: first.strategy.objective,
        n_trials: trials.len(),
        final_mean,
        final_stderr,
        resolved_mean: mean_and_stderr(&resolved).0,
        finals,
        resolved,
        curve,
        anomalies: trials.iter().map(|t| t.anomalies).sum(),
        c_inf,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::engine::Counters;
    use crate::geometry::GameParams;
    use crate::policy::StrategyConfig;

    fn summary(arrivals: usize, captures: usize) -> TrialSummary {
        TrialSummary {
            seed: 0,
            params: GameParams::defaults_with_period(2.0).unwrap(),
            strategy: StrategyConfig::earliest_breach(),
            horizon: 100.0,
            counters: Counters {
                arrived: arrivals as u64,
                captured: captures as u64,
                breached: (arrivals - captures) as u64,
                escaped: 0,
            },
            arrival_times: (0..arrivals).map(|i| i as f64).collect(),
            capture_times: (0..captures).map(|i| 50.0 + i as f64).collect(),
            anomalies: 0,
        }
    }

    #[test]
    fn checkpoint_grid() {
        let c = checkpoints(1e4);
        assert_eq!(c.len(), 61);
        assert_eq!(c[0], 10.0);
        assert_eq!(*c.last().unwrap(), 1e4);
        assert_abs_diff_eq!(c[20], 100.0, epsilon = 1e-9);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        let odd = checkpoints(150.0);
        assert_eq!(*odd.last().unwrap(), 150.0);
        assert!(odd[odd.len() - 2] < 150.0);
        assert_eq!(checkpoints(5.0), vec![5.0]);
    }

    #[test]
    fn two_sample_arithmetic() {
        let (m, se) = mean_and_stderr(&[0.4, 0.6]);
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(se, 0.1, epsilon = 1e-15);
        assert_eq!(mean_and_stderr(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn identical_trials_have_no_spread() {
        let trials: Vec<_> = (0..100).map(|_| summary(10, 5)).collect();
        let cell = aggregate(&trials, &[100.0], 0.2).unwrap();
        assert_eq!(cell.final_mean, 0.5);
        assert_eq!(cell.final_stderr, 0.0);
        assert_eq!(cell.curve[0].mean, 0.5);
        assert_eq!(cell.n_trials, 100);
    }

    #[test]
    fn order_does_not_matter() {
        let mut trials: Vec<_> = (1..=9).map(|c| summary(10, c)).collect();
        let a = aggregate(&trials, &checkpoints(100.0), 0.0).unwrap();
        trials.reverse();
        let b = aggregate(&trials, &checkpoints(100.0), 0.0).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!((a.final_mean, a.final_stderr), (b.final_mean, b.final_stderr));
    }

    #[test]
    fn mixed_configs_are_refused() {
        let mut other = summary(10, 5);
        other.strategy = StrategyConfig::nearest_agent();
        assert!(matches!(aggregate(&[summary(10, 5), other], &[1.0], 0.0), Err(Error::MixedConfig)));
        assert!(aggregate(&[], &[1.0], 0.0).is_err());
    }
}
