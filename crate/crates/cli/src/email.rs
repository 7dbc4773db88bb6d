use std::path::PathBuf;

use clap::Args;
use trackaudit_core::email::{actor_table_with_aliases, EmailAuditor};
use trackaudit_core::report::{export, Format};

use crate::config::Resources;
use crate::io::{file_stem, list_files, write_file};
use crate::{CliError, Failures};

#[derive(Debug, Args)]
pub struct EmailArgs {
    /// Directory of raw .eml messages.
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// JSON lines output, one record per message.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the actor table (actor,sources) as CSV.
    #[arg(long, value_name = "FILE")]
    actors: Option<PathBuf>,
    /// Group actor rows by owning entity.
    #[arg(long)]
    by_entity: bool,
    /// Keep full hostnames per external domain in the records.
    #[arg(long)]
    debug_hosts: bool,
}

pub fn run(args: &EmailArgs, res: &Resources) -> Result<Failures, CliError> {
    let files = list_files(&args.input, "eml")?;
    let mut messages = Vec::with_capacity(files.len());
    let mut failures = 0;
    for path in &files {
        match std::fs::read(path) {
            Ok(raw) => messages.push((file_stem(path), raw)),
            Err(e) => {
                log::error!("{}: {e}", path.display());
                failures += 1;
            }
        }
    }
    let auditor = EmailAuditor::new(&res.psl, &res.allowlist).with_debug_hosts(args.debug_hosts);
    let mut records = Vec::new();
    for ((label, _), result) in messages.iter().zip(auditor.audit_batch(&messages)) {
        match result {
            Ok(r) => records.push((label.clone(), r)),
            Err(e) => {
                log::error!("{label}: {e}");
                failures += 1;
            }
        }
    }

    let mut out = Vec::new();
    for (_, r) in &records {
        serde_json::to_writer(&mut out, r).map_err(|e| CliError::Output(e.to_string()))?;
        out.push(b'\n');
    }
    write_file(&args.out, &out)?;

    if let Some(path) = &args.actors {
        let mut table = actor_table_with_aliases(records.iter().map(|(l, r)| (l.as_str(), r)), &res.aliases);
        if args.by_entity {
            table = table.by_entity(&res.entities);
        }
        let bytes = export(&table.rows, Format::Csv).map_err(|e| CliError::Output(e.to_string()))?;
        write_file(path, &bytes)?;
    }
    eprintln!("audited {} message(s), {failures} failure(s)", records.len());
    Ok(failures)
}
