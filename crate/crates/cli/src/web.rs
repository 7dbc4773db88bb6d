use std::collections::BTreeSet;
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};

use clap::Args;
use trackaudit_core::report::{export, summarize_sessions, Format, RawCookieRow};
use trackaudit_core::web::{fetch_batch, ingest_capture, CaptureSession, FetchOptions, SiteFailure};

use crate::config::{Resources, RunConfig};
use crate::io::{list_files, read_text, write_file};
use crate::{CliError, Failures};

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["fetch", "ingest"]))]
pub struct WebArgs {
    /// Site list, one URL per line.
    #[arg(long, value_name = "FILE")]
    sites: Option<PathBuf>,
    /// Fetch each site statically (pre-consent only).
    #[arg(long, requires = "sites")]
    fetch: bool,
    /// Ingest capture files from a browser tool instead of fetching.
    #[arg(long, value_name = "DIR")]
    ingest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Pin a host to an address, e.g. example.fr=127.0.0.1:8080.
    #[arg(long, value_name = "HOST=ADDR")]
    resolve: Vec<String>,
}

fn parse_resolve(pin: &str) -> Result<(String, SocketAddr), CliError> {
    let bad = || CliError::Input(format!("--resolve {pin:?}: expected HOST=IP:PORT"));
    let (host, addr) = pin.split_once('=').ok_or_else(bad)?;
    let addr = addr.to_socket_addrs().map_err(|_| bad())?.next().ok_or_else(bad)?;
    Ok((host.trim().to_ascii_lowercase(), addr))
}

fn read_sites(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn failure(site: &str, kind: &str, detail: impl ToString) -> SiteFailure {
    SiteFailure { site: site.to_string(), kind: kind.to_string(), detail: detail.to_string() }
}

/// `sessions/<host>-<phase>.json`, made unique with a counter.
fn session_path(dir: &Path, s: &CaptureSession, taken: &mut BTreeSet<PathBuf>) -> PathBuf {
    let host: String =
        s.site_host().chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect();
    let mut n = 0;
    loop {
        let name = if n == 0 { format!("{host}-{}.json", s.phase) } else { format!("{host}-{}-{n}.json", s.phase) };
        let p = dir.join(name);
        if taken.insert(p.clone()) {
            return p;
        }
        n += 1;
    }
}

pub fn run(args: &WebArgs, cfg: &RunConfig, res: &Resources) -> Result<Failures, CliError> {
    let mut failures: Vec<SiteFailure> = Vec::new();
    let sessions: Vec<CaptureSession> = if let Some(dir) = &args.ingest {
        let wanted: Option<BTreeSet<String>> = match &args.sites {
            Some(p) => Some(
                read_sites(p)?
                    .iter()
                    .map(|s| s.split_once("://").map_or(s.as_str(), |(_, r)| r).split('/').next().unwrap_or("").to_string())
                    .collect(),
            ),
            None => None,
        };
        let mut out = Vec::new();
        for path in list_files(dir, "json")? {
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(failure(&name, "io", e));
                    continue;
                }
            };
            match ingest_capture(&text, &res.psl) {
                Ok(s) if wanted.as_ref().is_none_or(|w| w.contains(s.site_host())) => out.push(s),
                Ok(_) => log::info!("{name}: site not in the site list, skipped"),
                Err(e) => {
                    log::error!("{name}: {e}");
                    failures.push(failure(&name, e.kind(), e));
                }
            }
        }
        out
    } else {
        let sites = read_sites(args.sites.as_deref().expect("clap enforces --sites with --fetch"))?;
        let opts = FetchOptions {
            redirect_limit: cfg.redirects,
            timeout: cfg.timeout,
            resolve: args.resolve.iter().map(|r| parse_resolve(r)).collect::<Result<_, _>>()?,
            ..FetchOptions::default()
        };
        let outcome = fetch_batch(&sites, &opts, &res.psl, cfg.parallel);
        failures.extend(outcome.failures);
        outcome.sessions
    };

    let (summaries, summary_errors) = summarize_sessions(&sessions, &res.psl);
    for (site, e) in summary_errors {
        failures.push(failure(&site, e.kind(), e));
    }

    let session_dir = args.out.join("sessions");
    let mut taken = BTreeSet::new();
    for s in &sessions {
        let bytes = serde_json::to_vec_pretty(s).map_err(|e| CliError::Output(e.to_string()))?;
        write_file(&session_path(&session_dir, s, &mut taken), &bytes)?;
    }
    let raw: Vec<RawCookieRow> = sessions.iter().flat_map(RawCookieRow::from_session).collect();
    let csv = |rows: Result<Vec<u8>, _>| rows.map_err(|e: trackaudit_core::report::ReportError| CliError::Output(e.to_string()));
    write_file(&args.out.join("raw.csv"), &csv(export(&raw, Format::Csv))?)?;
    write_file(&args.out.join("summary.csv"), &csv(export(&summaries, Format::Csv))?)?;
    write_file(&args.out.join("errors.csv"), &csv(export(&failures, Format::Csv))?)?;
    eprintln!("{} session(s) written, {} failure(s)", sessions.len(), failures.len());
    Ok(failures.len())
}
