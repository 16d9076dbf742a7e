use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use survcop_cli::commands::{self, SimulateArgs};

/// Boosted distributional copula regression for bivariate right-censored
/// time-to-event data.
///
/// Exit codes: 0 success, 2 validation error (files, config, parameter
/// ranges), 3 numeric failure. SURVCOP_THREADS caps worker threads.
#[derive(Parser)]
#[command(name = "survcop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a built-in or custom scenario.
    Simulate {
        /// scr | bte-linear | bte-nonlinear | custom
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// Toeplitz base correlation of consecutive covariates.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// mild | heavy (BTE scenarios only).
        #[arg(long)]
        censoring: Option<String>,
        /// Custom scenario description (JSON), required for --scenario custom.
        #[arg(long)]
        custom: Option<PathBuf>,
        /// Output CSV path; the truth record lands at <out>.truth.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model and write the model artifact (JSON).
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-observation parameters, dependence measures and survival curves.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Query times, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a fitted model on a test set.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Truth sidecar (defaults to <data>.truth.json when present).
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank margin families and copulas by held-out log-score.
    Scan {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Candidate margin families, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "weibull,lognormal,loglogistic")]
        margins: Vec<String>,
        /// Candidate copulas (rotation suffix 90/180/270), comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "independence,gaussian,frank,clayton,clayton90,clayton180,clayton270,gumbel,gumbel90,gumbel180,gumbel270,joe,joe90,joe180,joe270"
        )]
        copulas: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> survcop::Result<()> {
    match cli.command {
        Command::Simulate { scenario, n, p, rho, seed, censoring, custom, out } => {
            commands::cmd_simulate(&SimulateArgs {
                scenario,
                n,
                p,
                rho,
                seed,
                censoring,
                custom,
                out,
            })?;
        }
        Command::Fit { data, config, out } => {
            commands::cmd_fit(&data, &config, &out)?;
        }
        Command::Predict { model, data, times, out } => {
            commands::cmd_predict(&model, &data, &times, &out)?;
        }
        Command::Evaluate { model, data, truth, out } => {
            commands::cmd_evaluate(&model, &data, truth.as_deref(), out.as_deref())?;
        }
        Command::Scan { data, config, margins, copulas, out } => {
            commands::cmd_scan(&data, &config, &margins, &copulas, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    survcop::par::init_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
