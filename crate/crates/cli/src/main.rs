//! `norms` — the verification pipeline CLI.
//!
//! Exit codes: 0 success, 1 data or runtime failure, 2 usage error.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "norms",
    version,
    about = "Machine verification of concept-feature norms: ingest, verify, score, triplets, report"
)]
struct Cli {
    /// Key-value config file; flags override it, it overrides environment
    /// variables.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Print the resolved configuration and exit without running.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load the concepts and cells CSVs and write the canonical dataset
    /// dump.
    Ingest(commands::ingest::IngestArgs),
    /// Answer a probe plan through the oracle (or the seeded mock) and
    /// write the machine matrix.
    Verify(commands::verify::VerifyArgs),
    /// Score a machine matrix against the human labels.
    Score(commands::score::ScoreArgs),
    /// Generate or evaluate triplet judgment items.
    #[command(subcommand)]
    Triplets(commands::triplets::TripletsCommand),
    /// Emit the plot-ready per-condition x per-space table.
    Report(commands::report::ReportArgs),
}

/// Shared oracle/run settings accepted by `verify`.
#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Completion endpoint URL (falls back to config `endpoint`, then
    /// ORACLE_URL).
    #[arg(long)]
    endpoint: Option<String>,
    /// Bearer token (falls back to config `token`, then ORACLE_TOKEN).
    #[arg(long)]
    token: Option<String>,
    /// Answer probes from the seeded mock instead of an endpoint.
    #[arg(long)]
    mock: bool,
    /// Mock miss probability.
    #[arg(long, default_value_t = 0.0)]
    p_miss: f64,
    /// Mock false-alarm probability.
    #[arg(long, default_value_t = 0.0)]
    p_fa: f64,
    /// Agreement threshold defining the mock's ground-truth matrix.
    #[arg(long, default_value_t = 1.0)]
    mock_tau: f64,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(cli);
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file_config = config::FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => commands::ingest::run(args, &file_config, cli.print_config),
        Command::Verify(args) => commands::verify::run(args, &file_config, cli.print_config),
        Command::Score(args) => commands::score::run(args, &file_config, cli.print_config),
        Command::Triplets(cmd) => commands::triplets::run(cmd, &file_config, cli.print_config),
        Command::Report(args) => commands::report::run(args, &file_config, cli.print_config),
    }
}
