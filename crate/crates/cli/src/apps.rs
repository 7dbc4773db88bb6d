use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use trackaudit_core::app::{
    is_red_flagged, label_interactively, permission_summary, replay_log, scan_apps, AnswerLog, AppDump, AppRecord,
    Decision, PermissionSummary, RedFlagThresholds,
};

use crate::config::Resources;
use crate::io::{emit, list_files, read_text};
use crate::{CliError, Failures};

#[derive(Debug, Subcommand)]
pub enum ApkCommand {
    /// Scan app dumps against the tracker signatures.
    Scan(ScanArgs),
    /// Permission and tracker statistics over scanned apps.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Directory of app dump JSON files, one app per file.
    #[arg(long, value_name = "DIR")]
    dumps: PathBuf,
    /// Output JSON array of app records.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Answer log whose decisions are applied to the scanned apps.
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Population {
    /// Apps labeled public service.
    PublicService,
    /// Every app.
    All,
}

impl Population {
    pub fn select(self, apps: Vec<AppRecord>) -> Vec<AppRecord> {
        match self {
            Population::All => apps,
            Population::PublicService => apps.into_iter().filter(|a| a.decision == Decision::PublicService).collect(),
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// App records written by `apk scan` or `label`.
    #[arg(long, value_name = "FILE")]
    apps: PathBuf,
    #[arg(long, value_enum, default_value = "public-service")]
    population: Population,
    /// Red-flag threshold on permissions.
    #[arg(long, default_value_t = 10)]
    max_permissions: usize,
    /// Red-flag threshold on trackers.
    #[arg(long, default_value_t = 5)]
    max_trackers: usize,
    /// Output JSON file (default: stdout).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// App records to label.
    #[arg(long, value_name = "FILE")]
    apps: PathBuf,
    /// Append-only answer log; existing answers are replayed first.
    #[arg(long, value_name = "FILE")]
    log: PathBuf,
    /// Write the labeled records here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn read_apps(path: &Path) -> Result<Vec<AppRecord>, CliError> {
    let apps: Vec<AppRecord> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for a in &apps {
        a.validate().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(apps)
}

fn write_json<T: Serialize + ?Sized>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    emit(path, &bytes)
}

pub fn apk(cmd: &ApkCommand, res: &Resources) -> Result<Failures, CliError> {
    match cmd {
        ApkCommand::Scan(args) => scan(args, res),
        ApkCommand::Stats(args) => stats(args, res),
    }
}

fn scan(args: &ScanArgs, res: &Resources) -> Result<Failures, CliError> {
    let mut dumps = Vec::new();
    let mut failures = 0;
    for path in list_files(&args.dumps, "json")? {
        match read_text(&path).and_then(|t| AppDump::from_json(&t).map_err(|e| CliError::Input(e.to_string()))) {
            Ok(d) => dumps.push(d),
            Err(e) => {
                log::error!("{}: {e}", path.display());
                failures += 1;
            }
        }
    }
    let mut apps = scan_apps(&dumps, &res.signatures);
    if let Some(log_path) = &args.labels {
        let restored = replay_log(&mut apps, &read_text(log_path)?).map_err(|e| CliError::Input(e.to_string()))?;
        log::info!("restored {restored} decision(s) from {}", log_path.display());
    }
    write_json(Some(&args.out), &apps)?;
    eprintln!("scanned {} app(s), {failures} failure(s)", apps.len());
    Ok(failures)
}

#[derive(Serialize)]
struct Stats<'a> {
    #[serde(flatten)]
    summary: PermissionSummary,
    red_flagged: Vec<&'a str>,
}

fn stats(args: &StatsArgs, res: &Resources) -> Result<Failures, CliError> {
    let apps = args.population.select(read_apps(&args.apps)?);
    let summary = permission_summary(&apps, &res.intrusive).map_err(|e| CliError::Input(e.to_string()))?;
    let t = RedFlagThresholds { max_permissions: args.max_permissions, max_trackers: args.max_trackers };
    let red_flagged = apps.iter().filter(|a| is_red_flagged(a, &t)).map(|a| a.app_id.as_str()).collect();
    write_json(args.out.as_deref(), &Stats { summary, red_flagged })?;
    Ok(0)
}

pub fn label(args: &LabelArgs, _res: &Resources) -> Result<Failures, CliError> {
    let mut apps = read_apps(&args.apps)?;
    let existing = match std::fs::read_to_string(&args.log) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(CliError::Input(format!("{}: {e}", args.log.display()))),
    };
    let restored = replay_log(&mut apps, &existing).map_err(|e| CliError::Input(e.to_string()))?;
    if restored > 0 {
        eprintln!("resumed: {restored} app(s) already labeled");
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&args.log)
        .map_err(|e| CliError::Output(format!("{}: {e}", args.log.display())))?;
    let mut log = AnswerLog::new(file, existing.trim().is_empty()).map_err(|e| CliError::Output(e.to_string()))?;
    let stdin = std::io::stdin();
    label_interactively(&mut apps, stdin.lock(), std::io::stdout(), &mut log).map_err(|e| CliError::Output(e.to_string()))?;
    if let Some(out) = &args.out {
        write_json(Some(out), &apps)?;
    }
    let left = apps.iter().filter(|a| a.decision == Decision::Undecided).count();
    eprintln!("{} app(s) labeled, {left} left", apps.len() - left);
    Ok(0)
}
