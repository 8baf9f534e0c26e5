use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlse_lab::{execute, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "nlse-lab", version, about = "Split-step experiments for lossy and integrable NLS equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to [output].dir, then ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate [model].kind from the datum
    Simulate(Common),
    /// Check ||v - u|| and the moment bounds along a run
    Closeness(Common),
    /// Step-size study against the exact soliton
    Convergence(Common),
    /// Tabulate L(eps) and delta_max
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        epsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        deltas: Vec<f64>,
    },
    /// Evaluate the Painlevé condition for a coefficient family
    PainleveCheck(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::Closeness(c) => (Experiment::Closeness, c),
        Command::Convergence(c) => (Experiment::Convergence, c),
        Command::Sweep { common, epsilons, deltas } => (Experiment::Sweep { epsilons, deltas }, common),
        Command::PainleveCheck(c) => (Experiment::PainleveCheck, c),
    };
    let cfg = match ExperimentConfig::load(&common.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let out = common
        .out
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.resolve(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    match execute(&experiment, &cfg, &out) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("outputs in {}", out.display());
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
