use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod failure;
mod records;

use failure::Failure;

/// Universal density estimation with mixtures of multiresolution histograms.
#[derive(Debug, Parser)]
#[command(name = "histmix", version, about)]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw observations from the configured source.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Observation file to write (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Stream observations through the estimator and report convergence records.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Forecast E[r(X_j) | past] before each observation.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// one | identity | cell:IDX | const:C
        #[arg(long)]
        r: Option<String>,
    },
    /// Run every configured seed against the source and emit per-seed and aggregate metrics.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: Option<PathBuf>,
        /// one | identity | cell:IDX | const:C
        #[arg(long)]
        r: Option<String>,
        /// Worker threads (default: available parallelism).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed (the base seed for `evaluate`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("histmix: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Synth { common, output } => {
            let cfg = commands::load_config(&common.config, common.seed, None)?;
            let out = records::open_output(output.as_deref())?;
            commands::synth(&cfg, out, quiet)
        }
        Command::Estimate { common, input, output } => {
            let cfg = commands::load_config(&common.config, common.seed, None)?;
            let inp = records::open_input(&input)?;
            let out = records::open_output(output.as_deref())?;
            commands::estimate(&cfg, inp, out, quiet)
        }
        Command::Predict { common, input, output, r } => {
            let cfg = commands::load_config(&common.config, common.seed, r.as_deref())?;
            let inp = records::open_input(&input)?;
            let out = records::open_output(output.as_deref())?;
            commands::predict(&cfg, inp, out, quiet)
        }
        Command::Evaluate { common, output, r, jobs } => {
            let cfg = commands::load_config(&common.config, common.seed, r.as_deref())?;
            let out = records::open_output(output.as_deref())?;
            commands::evaluate(&cfg, out, jobs.map(|j| j as usize), quiet)
        }
    }
}
