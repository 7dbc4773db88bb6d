//! `trackaudit` command line: email, web, apk, label and report.
//!
//! Exit codes: 0 on success, 1 on a fatal configuration or input error,
//! 2 when a batch finished but some items failed.

pub mod config;
mod email;
mod io;
mod report;
mod apps;
mod web;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Overrides, RunConfig, CONFIG_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
}

/// Per-item failures of a completed batch.
pub type Failures = usize;

#[derive(Debug, Parser)]
#[command(name = "trackaudit", version, about = "Audit third-party tracking in emails, websites and mobile apps")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Config file of key=value lines (default: $TRACKAUDIT_CONFIG).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Public suffix list file (default: bundled copy).
    #[arg(long, global = true, value_name = "FILE")]
    psl: Option<PathBuf>,
    /// Also apply the list's private-domain rules.
    #[arg(long, global = true)]
    psl_private: bool,
    /// Allowlisted domains, one per line (default: w3.org).
    #[arg(long, global = true, value_name = "FILE")]
    allowlist: Option<PathBuf>,
    /// Same-organization domain groups, one group per line.
    #[arg(long, global = true, value_name = "FILE")]
    aliases: Option<PathBuf>,
    /// Entity map CSV (pattern,entity).
    #[arg(long, global = true, value_name = "FILE")]
    entities: Option<PathBuf>,
    /// Tracker signature JSON.
    #[arg(long, global = true, value_name = "FILE")]
    sigs: Option<PathBuf>,
    /// Intrusive permission list.
    #[arg(long, global = true, value_name = "FILE")]
    intrusive: Option<PathBuf>,
    /// Worker count for batches.
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,
    /// Per-site network timeout in seconds.
    #[arg(long, global = true, value_name = "SECS")]
    timeout: Option<u64>,
    /// Maximum redirects followed per site.
    #[arg(long, global = true, value_name = "N")]
    redirects: Option<usize>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Audit a directory of .eml files.
    Email(email::EmailArgs),
    /// Capture or ingest website sessions and summarize them.
    Web(web::WebArgs),
    /// App dump scanning and statistics.
    Apk {
        #[command(subcommand)]
        command: apps::ApkCommand,
    },
    /// Label apps as public service or not, interactively.
    Label(apps::LabelArgs),
    /// Build a report table from earlier outputs.
    Report(report::ReportArgs),
}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).try_init();
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.global.verbose);
    match execute(cli) {
        Ok(0) => 0,
        Ok(n) => {
            eprintln!("completed with {n} failed item(s)");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<Failures, CliError> {
    let g = &cli.global;
    let config_file = g.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let overrides = Overrides {
        psl: g.psl.clone(),
        psl_private: g.psl_private,
        allowlist: g.allowlist.clone(),
        aliases: g.aliases.clone(),
        signatures: g.sigs.clone(),
        entities: g.entities.clone(),
        intrusive: g.intrusive.clone(),
        parallel: g.parallel,
        timeout: g.timeout,
        redirects: g.redirects,
    };
    let cfg = RunConfig::resolve(config_file.as_deref(), &overrides)?;
    let res = cfg.load()?;
    match cli.command {
        // Interactive labeling stays single-threaded regardless of config.
        Command::Label(args) => apps::label(&args, &res),
        command => {
            trackaudit_core::par::set_threads(cfg.parallel);
            match command {
                Command::Email(args) => email::run(&args, &res),
                Command::Web(args) => web::run(&args, &cfg, &res),
                Command::Apk { command } => apps::apk(&command, &res),
                Command::Report(args) => report::run(&args, &res),
                Command::Label(_) => unreachable!(),
            }
        }
    }
}
