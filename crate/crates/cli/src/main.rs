//! `hdlda` — reproducible command-line front end for high-dimensional
//! (regularized) discriminant analysis: limit-theory curves, replicated
//! simulations, error heat maps, ridge-parameter selection, classification,
//! and internal self-checks.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 numerical failure,
//! 4 failed self-verification.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hdlda::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hdlda",
    version,
    about = "Theory curves, simulations, and classification for ridge-regularized LDA"
)]
struct Cli {
    /// Cap the worker-thread count used by replicated simulations.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; created if absent.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,

    /// Also emit SVG plots next to the CSVs.
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate limit error-rate curves over a ridge-parameter grid.
    Theory {
        /// Scenario file (JSON).
        #[arg(long)]
        config: PathBuf,

        /// Override the scenario seed (random mean structures only).
        #[arg(long)]
        seed: Option<u64>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Run a seeded, replicated simulation comparing classifier arms.
    Simulate {
        /// Scenario file (JSON).
        #[arg(long)]
        config: PathBuf,

        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,

        /// Override the replicate count.
        #[arg(long)]
        replicates: Option<usize>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Sweep (dimension, correlation) cells and emit per-arm error surfaces.
    Heatmap {
        /// Scenario file (JSON).
        #[arg(long)]
        config: PathBuf,

        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,

        /// Override the per-cell replicate count.
        #[arg(long)]
        replicates: Option<usize>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Select the ridge parameter from a labeled dataset.
    SelectLambda {
        /// Labeled CSV: feature columns then a final `label` column (1/2).
        #[arg(long)]
        data: PathBuf,

        /// Smallest grid value (give all three grid flags or none).
        #[arg(long)]
        grid_min: Option<f64>,

        /// Largest grid value.
        #[arg(long)]
        grid_max: Option<f64>,

        /// Number of log-spaced grid points.
        #[arg(long)]
        grid_points: Option<usize>,

        /// Cross-validation fold count.
        #[arg(long, default_value_t = 5)]
        k: usize,

        /// Seed for the cross-validation fold shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Label feature rows with a population rule or a fitted rule.
    Classify {
        /// Population spec (JSON: mu1, mu2, covariance) — uses its exact rule.
        #[arg(long, conflicts_with = "train")]
        config: Option<PathBuf>,

        /// Labeled training CSV — fits the rule chosen by --method.
        #[arg(long)]
        train: Option<PathBuf>,

        /// Rule for --train: lda, corrected_lda, rlda, corrected_rlda, naive_bayes.
        #[arg(long)]
        method: Option<String>,

        /// Ridge parameter for rlda / corrected_rlda.
        #[arg(long)]
        lambda: Option<f64>,

        /// Feature-only CSV of rows to label.
        #[arg(long)]
        data: PathBuf,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Run fast internal self-checks and print a residual table.
    Verify {
        /// Monte-Carlo draws for the Wishart moment check.
        #[arg(long, default_value_t = 4000)]
        draws: usize,

        /// Seed for the Monte-Carlo checks.
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,

        /// Test hook: additive offset applied to the fixed-point solution.
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_m0: f64,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set up {jobs} worker threads: {e}")))?;
    }
    match cli.command {
        Command::Theory {
            config,
            seed,
            output,
        } => commands::cmd_theory(&config, &output.out, seed, output.plot, output.force),
        Command::Simulate {
            config,
            seed,
            replicates,
            output,
        } => commands::cmd_simulate(
            &config,
            &output.out,
            seed,
            replicates,
            output.plot,
            output.force,
        ),
        Command::Heatmap {
            config,
            seed,
            replicates,
            output,
        } => commands::cmd_heatmap(
            &config,
            &output.out,
            seed,
            replicates,
            output.plot,
            output.force,
        ),
        Command::SelectLambda {
            data,
            grid_min,
            grid_max,
            grid_points,
            k,
            seed,
            output,
        } => commands::cmd_select_lambda(
            &data,
            &output.out,
            grid_min,
            grid_max,
            grid_points,
            k,
            seed,
            output.plot,
            output.force,
        ),
        Command::Classify {
            config,
            train,
            method,
            lambda,
            data,
            output,
        } => {
            let source = match (config, train) {
                (Some(path), None) => commands::ModelSource::Config(path),
                (None, Some(path)) => commands::ModelSource::Train(path),
                _ => {
                    return Err(Error::Config(
                        "specify exactly one of --config or --train".into(),
                    ))
                }
            };
            let method = method.map(|m| m.parse()).transpose()?;
            commands::cmd_classify(source, method, lambda, &data, &output.out, output.force)
        }
        Command::Verify {
            draws,
            seed,
            perturb_m0,
        } => commands::cmd_verify(draws, seed, perturb_m0),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
