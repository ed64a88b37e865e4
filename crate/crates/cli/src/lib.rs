//! Experiment runner behind the `beamspace` binary: parses `key=value`
//! configuration, runs one command and writes its `.dat` tables.

pub mod config;
pub mod experiments;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{CodeChoice, Experiment, ExperimentConfig};
pub use experiments::Output;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] beamspace::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GenRuler,
    GenRm,
    AnalyzeCode,
    Simulate,
    ReportBounds,
    Beampattern,
    /// Dispatch on the `experiment` key.
    Run,
}

fn run_experiment(e: Experiment, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    match e {
        Experiment::Fig1Curves => experiments::fig1_curves(cfg),
        Experiment::Fig2RmPruning => experiments::fig2_rm_pruning(cfg),
        Experiment::Fig4IsotropicPe => experiments::fig4_isotropic_pe(cfg),
        Experiment::Fig5CbsPe => experiments::fig5_cbs_pe(cfg),
        Experiment::Fig6Beampattern => experiments::fig6_beampattern(cfg),
        Experiment::BoundsReport => experiments::bounds_report(cfg),
    }
}

fn only(cmd: &str, allowed: &[Experiment], cfg: &ExperimentConfig) -> Result<Experiment, CliError> {
    match cfg.experiment {
        Some(e) if allowed.contains(&e) => Ok(e),
        Some(e) => Err(CliError::Config(format!("{cmd} cannot run experiment {e}"))),
        None if allowed.len() == 1 => Ok(allowed[0]),
        None => {
            let names: Vec<&str> = allowed.iter().map(Experiment::as_str).collect();
            Err(CliError::Config(format!("{cmd} needs experiment={}", names.join("|"))))
        }
    }
}

/// Runs a command without touching the filesystem.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    use Experiment::*;
    match cmd {
        Command::GenRuler => experiments::gen_ruler(cfg),
        Command::GenRm => experiments::gen_rm(cfg),
        Command::AnalyzeCode => match cfg.experiment {
            None => experiments::code_summary(cfg),
            Some(_) => run_experiment(only("analyze-code", &[Fig1Curves, Fig2RmPruning], cfg)?, cfg),
        },
        Command::Simulate => run_experiment(only("simulate", &[Fig4IsotropicPe, Fig5CbsPe], cfg)?, cfg),
        Command::ReportBounds => run_experiment(only("report-bounds", &[BoundsReport], cfg)?, cfg),
        Command::Beampattern => run_experiment(only("beampattern", &[Fig6Beampattern], cfg)?, cfg),
        Command::Run => {
            let e = cfg.experiment.ok_or_else(|| CliError::Config("run needs experiment=<id>".into()))?;
            run_experiment(e, cfg)
        }
    }
}

/// Runs a command on a pool of `cfg.workers` threads (if set).
pub fn run_with_workers(cmd: Command, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| run(cmd, cfg)),
        None => run(cmd, cfg),
    }
}

pub fn write_output(dir: &Path, out: &Output) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    out.files
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}

/// Runs, writes files under `cfg.out` and returns the output.
pub fn execute(cmd: Command, cfg: &ExperimentConfig) -> Result<(Output, Vec<PathBuf>), CliError> {
    let out = run_with_workers(cmd, cfg)?;
    let paths = write_output(&cfg.out, &out)?;
    Ok((out, paths))
}
