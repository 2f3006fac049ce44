//! Experiment driver for the rough-noise moment laboratory.
//!
//! Parses a flat key=value config, dispatches to a subcommand handler,
//! and persists the results as `result.jsonl`, `table.csv`, and
//! `plot.gp` in the output directory. Runs are cached in a directory
//! keyed by the command name and the config hash, so repeating an
//! experiment with an unchanged config replays the stored artifacts.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod record;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::record::{ResultRecord, TOOL_VERSION};

#[derive(Parser, Debug)]
#[command(name = "pam-lab", version, about = "Moment growth laboratory for the heat equation with rough multiplicative noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config file (flat key=value lines, # comments).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a single config entry; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for --set mc.seed=N.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Recompute even when a cached run with this config exists.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Directory for result artifacts; defaults to the config key `out`,
    /// then to ./out.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KappaMode {
    /// Ground-state oracle for the two-dimensional white-noise case.
    Townes,
    /// Lower bound from a trial-family search.
    Trial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckMode {
    /// Moment transfer to rescaled-time second moments.
    Hyper,
    /// Splitting the interaction series across a time split.
    Subadd,
    /// First-moment time-rescaling identity.
    Scaling,
    /// Certificate zero-margin time against the critical-time formula.
    Identity,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the noise regime for the configured Hurst parameters.
    Regime,
    /// Report the spectral normalization constants.
    Constants,
    /// Compute the interaction constant.
    Kappa {
        #[arg(value_enum)]
        mode: KappaMode,
    },
    /// Blowup horizon for the p-th moment from the interaction constant.
    CriticalTime,
    /// Monte Carlo moment estimates at fixed times.
    Moments,
    /// Quadrature mean of the mollified path functional.
    BetaMean,
    /// Renormalization constants by mollification level.
    Renorm,
    /// Gap between the renormalization constants and the functional mean.
    Gap,
    /// Classify moment growth against the mollification scale.
    BlowupScan,
    /// Variational positivity certificate for moment blowup.
    Certificate,
    /// Consistency checks between independent pipelines.
    Check {
        #[arg(value_enum)]
        mode: CheckMode,
    },
}

impl Command {
    pub fn slug(&self) -> &'static str {
        match self {
            Command::Regime => "regime",
            Command::Constants => "constants",
            Command::Kappa {
                mode: KappaMode::Townes,
            } => "kappa-townes",
            Command::Kappa {
                mode: KappaMode::Trial,
            } => "kappa-trial",
            Command::CriticalTime => "critical-time",
            Command::Moments => "moments",
            Command::BetaMean => "beta-mean",
            Command::Renorm => "renorm",
            Command::Gap => "gap",
            Command::BlowupScan => "blowup-scan",
            Command::Certificate => "certificate",
            Command::Check {
                mode: CheckMode::Hyper,
            } => "check-hyper",
            Command::Check {
                mode: CheckMode::Subadd,
            } => "check-subadd",
            Command::Check {
                mode: CheckMode::Scaling,
            } => "check-scaling",
            Command::Check {
                mode: CheckMode::Identity,
            } => "check-identity",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Io(format!("cannot read config {}: {e}", path.display()))
            })?;
            ExperimentConfig::from_text(&text)?
        }
        None => ExperimentConfig::empty(),
    };
    for assignment in &cli.set {
        cfg.apply_set(assignment)?;
    }
    if let Some(seed) = cli.seed {
        cfg.apply_set(&format!("mc.seed={seed}"))?;
    }
    Ok(cfg)
}

fn compute_artifacts(slug: &str, cfg: &ExperimentConfig, hash: &str) -> Result<cache::Artifacts> {
    let started = Instant::now();
    let output = commands::execute(slug, cfg)?;
    let timing_ms = started.elapsed().as_millis() as u64;
    let inputs = cfg.echo();
    let mut lines = String::new();
    for outputs in output.outputs {
        let record = ResultRecord {
            version: TOOL_VERSION,
            command: slug.to_owned(),
            config_hash: hash.to_owned(),
            inputs: inputs.clone(),
            outputs,
            timing_ms,
        };
        lines.push_str(&record.to_line());
        lines.push('\n');
    }
    let mut artifacts = vec![("result.jsonl".to_owned(), lines)];
    if let Some(table) = output.table {
        artifacts.push(("table.csv".to_owned(), table.to_csv()?));
    }
    if let Some(plot) = output.plot {
        artifacts.push(("plot.gp".to_owned(), plot));
    }
    Ok(artifacts)
}

fn run_inner(cli: &Cli) -> Result<Vec<String>> {
    let cfg = load_config(cli)?;
    let slug = cli.command.slug();
    let hash = cfg.hash();
    let entry = cache::entry_dir(&cache::cache_root(), slug, &hash);

    let cached = if cli.no_cache {
        None
    } else {
        cache::lookup(&entry)
    };
    let (artifacts, fresh) = match cached {
        Some(found) => (found, false),
        None => (compute_artifacts(slug, &cfg, &hash)?, true),
    };

    let out_dir = match &cli.out {
        Some(dir) => dir.clone(),
        None => PathBuf::from(cfg.str_or("out", "out")?),
    };
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    for (name, text) in &artifacts {
        record::write_text(&out_dir.join(name), text)?;
    }
    if fresh && !cli.no_cache {
        if let Err(e) = cache::store(&entry, &artifacts) {
            eprintln!("pam-lab: cache write failed: {e}");
        }
    }

    let jsonl = artifacts
        .iter()
        .find(|(name, _)| name == "result.jsonl")
        .map(|(_, text)| text.as_str())
        .unwrap_or_default();
    Ok(jsonl.lines().map(str::to_owned).collect())
}

/// Runs one subcommand end to end and returns the process exit code.
/// Result lines go to stdout; errors go to stderr.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("pam-lab: {e}");
            e.exit_code()
        }
    }
}
