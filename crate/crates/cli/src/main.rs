mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::CliError;

pub const DEFAULT_SEED: u64 = 2023;

#[derive(Parser, Debug)]
#[command(name = "dp-bounds", version, about = "Privacy verification and inference bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Options {
    /// JSON config: a file path, or inline JSON starting with '{'.
    #[arg(long, global = true, conflicts_with = "defaults")]
    pub config: Option<String>,

    /// Built-in config (fig1, rr, fig2a, fig2b, fig3, fig4, power, pufferfish).
    #[arg(long, global = true)]
    pub defaults: Option<String>,

    /// Privacy parameter; overrides the config. Accepts "inf".
    #[arg(long, global = true, value_parser = parse_epsilon, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output file. Defaults to $DP_BOUNDS_OUT_DIR/<command>.<format>, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check a mechanism for ε-DP over unit-distance pairs.
    VerifyDp,
    /// Envelope on the likelihood of a privatised output.
    MarginalBounds,
    /// Marginal bounds for local randomized response, by number of bits.
    RrBounds,
    /// Prior, posterior bounds and quadrature posteriors for the private count model.
    PosteriorBounds,
    /// Envelopes on the power of a level-α test.
    PowerBounds,
    /// Check a Pufferfish instantiation.
    PufferfishCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyDp => "verify-dp",
            Command::MarginalBounds => "marginal-bounds",
            Command::RrBounds => "rr-bounds",
            Command::PosteriorBounds => "posterior-bounds",
            Command::PowerBounds => "power-bounds",
            Command::PufferfishCheck => "pufferfish-check",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    match dp_bounds::config::parse_extended_real(s) {
        Some(v) if v >= 0.0 => Ok(v),
        _ => Err(format!("expected a nonnegative number or \"inf\", got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a verification ran and failed.
fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let cfg = config::load(cli.command, &cli.opts)?;
    let outcome = commands::dispatch(cli.command, &cfg, &cli.opts)?;
    let mut table = outcome.table;
    table.meta("config", cfg);
    table.meta("seed", serde_json::json!(cli.opts.seed));
    let bytes = match cli.opts.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json(),
    };
    let path = cli.opts.out.clone().or_else(|| {
        std::env::var_os("DP_BOUNDS_OUT_DIR")
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", cli.command.name(), cli.opts.format.extension())))
    });
    output::write_to(path.as_deref(), &bytes)?;
    if let Some(s) = outcome.summary {
        eprintln!("{s}");
    }
    Ok(outcome.passed)
}
