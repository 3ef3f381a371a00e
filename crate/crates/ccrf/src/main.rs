use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ccrf::cli;
use ccrf::gcrf::EdgeSpec;

#[derive(Parser)]
#[command(
    name = "ccrf",
    version,
    about = "Continuous conditional random fields over time series, with a kernel ELM baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EdgeChoice {
    Chain,
    Dm,
    Both,
}

impl EdgeChoice {
    fn edges(self) -> Vec<EdgeSpec> {
        match self {
            EdgeChoice::Chain => vec![EdgeSpec::ChainAdjacency],
            EdgeChoice::Dm => vec![EdgeSpec::DistanceToMean],
            EdgeChoice::Both => vec![EdgeSpec::ChainAdjacency, EdgeSpec::DistanceToMean],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit the pipeline on the training split and save model files
    Train {
        /// Run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Edge variant(s) to fit
        #[arg(long, value_enum, default_value_t = EdgeChoice::Both)]
        edge: EdgeChoice,
    },
    /// Apply a saved model to a feature CSV
    Predict {
        /// Model file written by `train`
        #[arg(long)]
        model: PathBuf,
        /// CSV with at least the timestamp and feature columns
        #[arg(long)]
        input: PathBuf,
        /// Where to write the prediction CSV
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare ELM, CCRF and DM-CCRF over a scenario grid
    Benchmark {
        /// Run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for scenarios (defaults to all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write the scenario grid as CSV to this path
        #[arg(long)]
        dump_grid: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { config, edge } => cli::cmd_train(&config, &edge.edges()),
        Command::Predict {
            model,
            input,
            output,
        } => cli::cmd_predict(&model, &input, &output),
        Command::Benchmark {
            config,
            jobs,
            dump_grid,
        } => cli::cmd_benchmark(&config, jobs, dump_grid.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
