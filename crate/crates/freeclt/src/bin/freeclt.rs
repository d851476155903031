//! Experiment runner for free convolution powers.
//!
//! ```text
//! freeclt <density|rates|check|entropy|fisher> --config <path.json> [--out <dir>] [--strict]
//! ```
//!
//! Exit codes: 0 when every hard check passes (under `--strict`,
//! warnings fail too), 1 when a check fails, 2 on operational errors
//! (unreadable config, solver breakdown, I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use freeclt::{
    init_threads, render_report, run_check, run_density, run_rates, ExperimentConfig, RateFocus,
    RunSummary,
};

#[derive(Parser)]
#[command(
    name = "freeclt",
    about = "Density, convergence-rate, and self-check experiments for free convolution powers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat warnings (for example a low fit r2) as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Recover densities of the rescaled powers and write one CSV per order.
    Density(RunArgs),
    /// Full rate table: entropy gap, Fisher gap, L1 distance, Meixner gap.
    Rates(RunArgs),
    /// Run the invariant self-check suite.
    Check(RunArgs),
    /// Entropy-gap rates only.
    Entropy(RunArgs),
    /// Fisher-gap rates only.
    Fisher(RunArgs),
}

fn run(
    args: &RunArgs,
    go: impl FnOnce(&ExperimentConfig, &std::path::Path) -> freeclt::Result<RunSummary>,
) -> ExitCode {
    // Parse only; semantic validation happens inside the runners so
    // that `check` can report a broken config as a named invariant.
    let cfg: ExperimentConfig = match std::fs::read_to_string(&args.config)
        .map_err(freeclt::Error::from)
        .and_then(|text| serde_json::from_str(&text).map_err(freeclt::Error::from))
    {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match go(&cfg, &out) {
        Ok(summary) => {
            print!("{}", render_report(&summary));
            if summary.pass && (!args.strict || summary.warnings.is_empty()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match &cli.command {
        Command::Density(a) => run(a, run_density),
        Command::Rates(a) => run(a, |c, o| run_rates(c, o, RateFocus::Full)),
        Command::Check(a) => run(a, run_check),
        Command::Entropy(a) => run(a, |c, o| run_rates(c, o, RateFocus::Entropy)),
        Command::Fisher(a) => run(a, |c, o| run_rates(c, o, RateFocus::Fisher)),
    }
}
