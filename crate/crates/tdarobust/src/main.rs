use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tdarobust::commands::{self, Common};

#[derive(Parser)]
#[command(name = "tdarobust", version, about = "Robust persistence diagrams from robust kernel density estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of an experiment config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Input CSVs start with a header row.
    #[arg(long, global = true)]
    header: bool,
    /// Also write SVG plots (experiments only).
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an estimator and sample it on a grid.
    Density,
    /// Persistence diagrams of a field.
    Pd,
    /// Distance between two diagrams.
    Dist,
    /// Persistence image of a diagram.
    Pimg,
    /// Run an experiment pipeline.
    Experiment {
        /// bottleneck-sim, influence-sim, circles-sim, shape-classify or confband.
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config) = cli.config.clone() else {
        let e = tdarobust::AppError::config("--config is required");
        eprintln!("{}", e.to_json());
        return ExitCode::from(e.exit_code() as u8);
    };
    let common = Common {
        out: cli.out,
        seed: cli.seed,
        header: cli.header,
        svg: cli.svg,
    };
    let result = match &cli.command {
        Command::Density => commands::density(&config, &common),
        Command::Pd => commands::pd(&config, &common),
        Command::Dist => commands::dist(&config, &common),
        Command::Pimg => commands::pimg(&config, &common),
        Command::Experiment { name } => commands::experiment(&config, name.as_deref(), &common),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
