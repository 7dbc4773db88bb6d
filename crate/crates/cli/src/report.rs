use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use trackaudit_core::app::tracker_identity_table;
use trackaudit_core::email::{actor_table_with_aliases, EmailAuditRecord};
use trackaudit_core::report::{
    domain_tallies, export, ranking_sessions, summarize_sessions, top_sites_by_third_cookies, Format, Tabular,
};
use trackaudit_core::web::CaptureSession;

use crate::apps::{read_apps, Population};
use crate::config::Resources;
use crate::io::{emit, list_files, read_text};
use crate::{CliError, Failures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    /// Sites ranked by third-party cookies (from web sessions).
    TopSites,
    /// Per-domain cookie and request tallies (from web sessions).
    Domains,
    /// Outside actors loading content in emails (from email records).
    Actors,
    /// Tracker share per owning entity (from app records).
    Entities,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A `web --out` directory, an email JSONL file or directory, or an
    /// app records file, depending on the table.
    #[arg(long, value_name = "PATH")]
    from: PathBuf,
    #[arg(long, value_enum, default_value = "top-sites")]
    table: Table,
    /// csv, jsonl or md.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Keep the first N rows.
    #[arg(long, value_name = "N")]
    top: Option<usize>,
    /// Group actors by owning entity.
    #[arg(long)]
    by_entity: bool,
    /// Apps counted in the entity table.
    #[arg(long, value_enum, default_value = "public-service")]
    population: Population,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn load_sessions(from: &Path) -> Result<(Vec<CaptureSession>, Failures), CliError> {
    let dir = if from.join("sessions").is_dir() { from.join("sessions") } else { from.to_path_buf() };
    let mut out = Vec::new();
    let mut failures = 0;
    for path in list_files(&dir, "json")? {
        match serde_json::from_str::<CaptureSession>(&read_text(&path)?) {
            Ok(s) => out.push(s),
            Err(e) => {
                log::error!("{}: {e}", path.display());
                failures += 1;
            }
        }
    }
    Ok((out, failures))
}

fn load_email_records(from: &Path) -> Result<(Vec<(String, EmailAuditRecord)>, Failures), CliError> {
    let files = if from.is_dir() { list_files(from, "jsonl")? } else { vec![from.to_path_buf()] };
    let mut out = Vec::new();
    let mut failures = 0;
    for path in files {
        for (idx, line) in read_text(&path)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            match serde_json::from_str::<EmailAuditRecord>(line) {
                Ok(r) => {
                    let label = r.source.clone().unwrap_or_else(|| r.message_id_hash.clone());
                    out.push((label, r));
                }
                Err(e) => {
                    log::error!("{}:{}: {e}", path.display(), idx + 1);
                    failures += 1;
                }
            }
        }
    }
    Ok((out, failures))
}

fn render<T: Tabular>(mut rows: Vec<T>, args: &ReportArgs, format: Format) -> Result<Vec<u8>, CliError> {
    if let Some(n) = args.top {
        rows.truncate(n);
    }
    export(&rows, format).map_err(|e| CliError::Output(e.to_string()))
}

pub fn run(args: &ReportArgs, res: &Resources) -> Result<Failures, CliError> {
    let format: Format = args.format.parse().map_err(|e: trackaudit_core::report::ReportError| CliError::Input(e.to_string()))?;
    if args.top == Some(0) {
        return Err(CliError::Input("--top must be at least 1".into()));
    }
    let (bytes, failures) = match args.table {
        Table::TopSites => {
            let (sessions, mut failures) = load_sessions(&args.from)?;
            let (summaries, errors) = summarize_sessions(&sessions, &res.psl);
            for (site, e) in &errors {
                log::error!("{site}: {e}");
            }
            failures += errors.len();
            let rows = top_sites_by_third_cookies(&summaries, summaries.len());
            (render(rows, args, format)?, failures)
        }
        Table::Domains => {
            let (sessions, failures) = load_sessions(&args.from)?;
            let chosen: Vec<CaptureSession> = ranking_sessions(&sessions).into_iter().cloned().collect();
            (render(domain_tallies(&chosen, &res.psl), args, format)?, failures)
        }
        Table::Actors => {
            let (records, failures) = load_email_records(&args.from)?;
            let mut table = actor_table_with_aliases(records.iter().map(|(l, r)| (l.as_str(), r)), &res.aliases);
            if args.by_entity {
                table = table.by_entity(&res.entities);
            }
            (render(table.rows, args, format)?, failures)
        }
        Table::Entities => {
            let apps = args.population.select(read_apps(&args.from)?);
            let rows = tracker_identity_table(&apps, &res.entities).map_err(|e| CliError::Input(e.to_string()))?;
            (render(rows, args, format)?, 0)
        }
    };
    emit(args.out.as_deref(), &bytes)?;
    Ok(failures)
}
