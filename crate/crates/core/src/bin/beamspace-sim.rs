use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use beamspace::analysis::BoundReport;
use beamspace::experiments::{emit_results, run_experiment, ExperimentConfig, OutputFormat};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "beamspace-sim", version, about = "Beamspace channel estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the closed-form bounds for one parameter point as JSON.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        alpha: f64,
        /// Combiner mutual coherence.
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Uplink noise variance.
        #[arg(long = "sigma2-ul", default_value_t = 1.0)]
        sigma2_ul: f64,
    },
}

fn run(cli: Cli) -> beamspace::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            threads,
            seed,
        } => {
            let text = fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = run_experiment(&cfg, threads)?;
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            emit_results(&table, &out, format)
        }
        Command::Bounds {
            n,
            v,
            alpha,
            mu,
            sigma2_ul,
        } => {
            let report = BoundReport::evaluate(n, v, alpha, mu, sigma2_ul)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
