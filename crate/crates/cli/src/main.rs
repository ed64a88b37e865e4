use std::process::ExitCode;

use beamspace_cli::{execute, Command, ExperimentConfig};
use clap::{Parser, Subcommand};

/// Beamspace sensing subspace codes: construction, analysis and simulation.
///
/// Parameters are `key=value` pairs; `config=FILE` reads more pairs from a
/// file and flags on the command line override it.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bose-Chowla ruler marks (p, extra)
    GenRuler { params: Vec<String> },
    /// Reed-Muller codewords (m, r, count)
    GenRm { params: Vec<String> },
    /// Code summary (code=bc|rm|ula|cbs) or experiment=fig1-curves|fig2-rm-pruning
    AnalyzeCode { params: Vec<String> },
    /// Monte Carlo Pe curves: experiment=fig4-isotropic-pe|fig5-cbs-pe
    Simulate { params: Vec<String> },
    /// Distance bounds check for prime t at n_grid = t^2 - 1
    ReportBounds { params: Vec<String> },
    /// Filter beampatterns (filter_lens, n_grid)
    Beampattern { params: Vec<String> },
    /// Any experiment selected by experiment=<id>
    Run { params: Vec<String> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, params) = match cli.command {
        Cmd::GenRuler { params } => (Command::GenRuler, params),
        Cmd::GenRm { params } => (Command::GenRm, params),
        Cmd::AnalyzeCode { params } => (Command::AnalyzeCode, params),
        Cmd::Simulate { params } => (Command::Simulate, params),
        Cmd::ReportBounds { params } => (Command::ReportBounds, params),
        Cmd::Beampattern { params } => (Command::Beampattern, params),
        Cmd::Run { params } => (Command::Run, params),
    };
    let result = ExperimentConfig::from_args(&params).and_then(|cfg| execute(cmd, &cfg));
    match result {
        Ok((out, paths)) => {
            for line in &out.summary {
                eprintln!("{line}");
            }
            for p in &paths {
                eprintln!("wrote {}", p.display());
            }
            if out.verified() {
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("FAIL: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
