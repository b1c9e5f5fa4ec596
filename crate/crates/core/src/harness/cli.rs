//! Command-line front end. The binary only forwards to [`cli_main`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{run_grid, write_csv, RunConfig};
use crate::bounds::{c_infinity_with, BoundReport, SetupTime};
use crate::engine::{run_trial_with, trial_seed, verify_record, TrialOptions, TrialRecord};
use crate::error::{Error, Result};
use crate::policy::StrategyConfig;

#[derive(Debug, Parser)]
#[command(name = "target-defense", version, about = "Single-defender target guarding against arriving intruders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to the subcommand defaults.
#[derive(Debug, Args)]
struct Common {
    /// Target radius.
    #[arg(long, global = true)]
    rt: Option<String>,
    /// Intruder sensing radius.
    #[arg(long, global = true)]
    rhoa: Option<String>,
    /// Width of the target sensing region.
    #[arg(long, global = true)]
    rhot: Option<String>,
    /// Intruder to defender speed ratio.
    #[arg(long, global = true)]
    nu: Option<String>,
    /// Arrival period, or a comma-separated list.
    #[arg(long, global = true)]
    period: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    /// Strategy weight, or a comma-separated list.
    #[arg(long, global = true)]
    w: Option<String>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// min_time or min_distance.
    #[arg(long, global = true)]
    objective: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Flat key = value file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    emit_trajectories: bool,
    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    threads: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run single trials and write their event logs.
    Simulate,
    /// Capture fraction against time for each weight.
    Montecarlo,
    /// Final capture fraction against the arrival period, with the bound.
    Sweep,
    /// Lower bound on the Earliest Breach capture fraction.
    Bound {
        /// Re-evaluate the setup time at each shrunken defender radius.
        #[arg(long)]
        shrinking_setup: bool,
    },
    /// Re-check a stored trial log.
    Replay {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
}

const SWEEP_PERIODS: [f64; 14] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0];

impl Common {
    fn build(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("rt", &self.rt),
            ("rhoa", &self.rhoa),
            ("rhot", &self.rhot),
            ("nu", &self.nu),
            ("period", &self.period),
            ("horizon", &self.horizon),
            ("trials", &self.trials),
            ("w", &self.w),
            ("seed", &self.seed),
            ("objective", &self.objective),
            ("out", &self.out),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.emit_trajectories {
            cfg.emit_trajectories = true;
        }
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    let periods = cfg.periods_or(&[2.0]);
    let params = cfg.validate(&periods)?;
    create_dir(&cfg.output_dir)?;
    for p in &params {
        for &w in &cfg.weights {
            let strategy = StrategyConfig::new(w, cfg.objective)?;
            for i in 0..cfg.trials {
                let options = TrialOptions {
                    emit_trajectories: cfg.emit_trajectories,
                    master_seed: Some(cfg.master_seed),
                    trial_index: Some(i as u64),
                    ..TrialOptions::default()
                };
                let seed = trial_seed(cfg.master_seed, i as u64);
                let record = run_trial_with(p, &strategy, cfg.horizon, seed, &options, None)?;
                let path = cfg
                    .output_dir
                    .join(format!("trial_T{}_w{w}_{i:04}.json", p.period()));
                record.write_json(&path)?;
                let c = record.counters;
                println!(
                    "{}: T={} w={w} seed={seed} arrived={} captured={} breached={} escaped={} fraction={:.6}",
                    path.display(),
                    p.period(),
                    c.arrived,
                    c.captured,
                    c.breached,
                    c.escaped,
                    record.summary().final_fraction()
                );
            }
        }
    }
    Ok(())
}

fn batch(cfg: &RunConfig, periods: &[f64], name: &str, final_only: bool) -> Result<()> {
    create_dir(&cfg.output_dir)?;
    let result = run_grid(cfg, periods)?;
    let csv = cfg.output_dir.join(format!("{name}.csv"));
    write_csv(&result, &csv, final_only)?;
    write_text(&cfg.output_dir.join(format!("{name}.json")), &(result.to_json()? + "\n"))?;
    println!("T,w,final_mean,final_stderr,resolved_mean,c_inf");
    for c in &result.cells {
        println!(
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            c.period, c.weight, c.final_mean, c.final_stderr, c.resolved_mean, c.c_inf
        );
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn bound_reports(cfg: &RunConfig, periods: &[f64], rule: SetupTime) -> Result<Vec<BoundReport>> {
    cfg.validate(periods)?
        .iter()
        .map(|p| c_infinity_with(p, rule).map(|(_, r)| r))
        .collect()
}

fn write_bounds(cfg: &RunConfig, reports: &[BoundReport]) -> Result<PathBuf> {
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("bounds.json");
    write_text(&path, &(serde_json::to_string_pretty(reports)? + "\n"))?;
    Ok(path)
}

fn bound(cfg: &RunConfig, rule: SetupTime) -> Result<()> {
    let reports = bound_reports(cfg, &cfg.periods_or(&SWEEP_PERIODS[..12]), rule)?;
    println!("T,k,ell,p_omega,t_star,tau_avg,c_inf,clamped");
    for r in &reports {
        println!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.period, r.k, r.ell, r.p_omega, r.t_star, r.tau_avg, r.c_infinity, r.clamped
        );
    }
    let path = write_bounds(cfg, &reports)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn replay(logs: &[PathBuf]) -> Result<()> {
    for path in logs {
        let record = TrialRecord::read_json(path)?;
        let report = verify_record(&record)?;
        println!("{}: ok {}", path.display(), serde_json::to_string(&report)?);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate => {
            let base = RunConfig {
                weights: vec![0.0],
                trials: 1,
                ..RunConfig::default()
            };
            simulate(&cli.common.build(base)?)
        }
        Command::Montecarlo => {
            let cfg = cli.common.build(RunConfig::default())?;
            batch(&cfg, &cfg.periods_or(&[2.0]), "montecarlo", false)
        }
        Command::Sweep => {
            let cfg = cli.common.build(RunConfig::default())?;
            let periods = cfg.periods_or(&SWEEP_PERIODS);
            batch(&cfg, &periods, "sweep", true)?;
            write_bounds(&cfg, &bound_reports(&cfg, &periods, SetupTime::Fixed)?)?;
            Ok(())
        }
        Command::Bound { shrinking_setup } => {
            let cfg = cli.common.build(RunConfig::default())?;
            let rule = if shrinking_setup {
                SetupTime::Shrinking
            } else {
                SetupTime::Fixed
            };
            bound(&cfg, rule)
        }
        Command::Replay { logs } => replay(&logs),
    }
}

/// Exit status for an error: 2 for bad input, 3 for a failed replay check,
/// 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::NonPositiveParameter { .. } | Error::AssumptionViolation { .. } => 2,
        Error::InvariantViolation(_) => 3,
        _ => 1,
    }
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
