//! `futureboost`: one subcommand per pipeline stage, driven by a single
//! run configuration file.

mod commands;
mod layout;

use chrono::NaiveDateTime;
use clap::{Parser, Subcommand};
use futureboost::config::RunConfig;
use futureboost::ingest::parse_timestamp;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "futureboost", version, about = "Two-stage day-ahead electricity price forecasting")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Validate the configuration and print the plan without writing anything.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Debug-level logging.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate the synthetic panel described by `paths.scenario`.
    Simulate,
    /// Align the sources listed in `paths.registry` into the canonical table.
    Ingest,
    /// Run stage-1 forecasters for every window day (cached).
    Forecast,
    /// Assemble per-window feature matrices.
    Features,
    /// Fit the stage-2 regressors of every window.
    Train,
    /// Predict each window's test month with the trained models.
    Predict,
    /// Run the whole rolling protocol in memory and write the report.
    Evaluate,
    /// SHAP waterfall of one test instance plus global importance.
    Explain {
        /// Timestamp of the instance, e.g. 2025-10-15T12:00:00.
        #[arg(long, value_parser = parse_instance)]
        instance: NaiveDateTime,
        /// Features listed individually in the waterfall.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u16).range(1..))]
        top_k: u16,
    },
    /// Summarize staged predictions into report and difficulty files.
    Report,
}

fn parse_instance(s: &str) -> Result<NaiveDateTime, String> {
    parse_timestamp(s).ok_or_else(|| format!("unparsable timestamp {s:?}"))
}

fn init_logging(verbose: bool) {
    let level = if verbose { log::LevelFilter::Debug } else { log::LevelFilter::Info };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format(|buf, record| writeln!(buf, "{}: {}", record.level().as_str().to_lowercase(), record.args()))
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let Some(config) = cli.config.clone() else {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        cmd.error(clap::error::ErrorKind::MissingRequiredArgument, "--config <PATH> is required").exit();
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global() {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    let run = RunConfig::load(&config).and_then(|cfg| {
        let cfg = match cli.seed {
            Some(s) => cfg.with_seed(s),
            None => cfg,
        };
        let ctx = commands::Context { config_path: config.clone(), cfg, dry_run: cli.dry_run };
        commands::run(&ctx, &cli.command)
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
