//! End-to-end acceptance checks, one `[PASS]`/`[FAIL]` line per criterion.
//! Runs without the libtest harness so the lines always print.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use trackaudit_core::app::{classify_public_service, EntityShare};
use trackaudit_core::domain::SuffixList;
use trackaudit_core::email::{ActorRow, EmailAuditRecord};
use trackaudit_core::report::{parse_csv, DomainTally, Tabular, TopSiteRow};
use trackaudit_core::trackerdb::bundled_signatures;
use trackaudit_core::web::{ingest_capture, site_report, static_fetch, FetchOptions, SiteFailure};
use trackaudit_testkit::fixtures::{
    aliases_path, emails_dir, entity_split_dumps, tally_captures, top_sites_captures, CaptureBuilder, ENTITY_SPLIT_PLAN,
};
use trackaudit_testkit::properties::SUITE;
use trackaudit_testkit::server::{consent_site_routes, dead_address, FixtureServer};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn trackaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trackaudit"))
        .args(args)
        .env_remove("TRACKAUDIT_CONFIG")
        .output()
        .expect("spawn trackaudit")
}

fn expect_exit(out: &Output, code: i32, what: &str) -> Result<(), String> {
    match out.status.code() {
        Some(c) if c == code => Ok(()),
        other => Err(format!("{what}: exit {other:?}, wanted {code}; stderr: {}", String::from_utf8_lossy(&out.stderr).trim())),
    }
}

fn read_table<T: Tabular>(path: &Path) -> Result<Vec<T>, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_csv(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_all(dir: &Path, files: &[(String, String)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (name, body) in files {
        std::fs::write(dir.join(name), body).unwrap();
    }
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn host_of(site: &str) -> &str {
    site.split_once("://").map_or(site, |(_, r)| r).trim_end_matches('/')
}

/// Email corpus through `trackaudit email`, grouped by owning entity.
fn ac1(tmp: &Path) -> Outcome {
    let (records, actors) = (tmp.join("ac1/records.jsonl"), tmp.join("ac1/actors.csv"));
    let started = Instant::now();
    let out = trackaudit(&[
        "--aliases",
        p(&aliases_path()),
        "email",
        "--in",
        p(&emails_dir()),
        "--out",
        p(&records),
        "--actors",
        p(&actors),
        "--by-entity",
    ]);
    let elapsed = started.elapsed();
    expect_exit(&out, 0, "email")?;

    let got: Vec<(String, Vec<String>)> =
        read_table::<ActorRow>(&actors)?.into_iter().map(|r| (r.actor, r.sources)).collect();
    let want: Vec<(String, Vec<String>)> = [
        ("Google", &["Crous", "DIRCOM", "Smerra", "laposte.fr", "laposte.net"][..]),
        ("Iroquois", &["Crous"][..]),
        ("Xiti", &["Ameli"][..]),
    ]
    .iter()
    .map(|(a, s)| (a.to_string(), s.iter().map(|x| x.to_string()).collect()))
    .collect();
    if got != want {
        return Err(format!("actor table {got:?}, wanted {want:?}"));
    }

    let text = std::fs::read_to_string(&records).map_err(|e| e.to_string())?;
    let parsed: Vec<EmailAuditRecord> =
        text.lines().map(serde_json::from_str).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for clean in ["impots", "CAF", "FranceConnect"] {
        let r = parsed
            .iter()
            .find(|r| r.source.as_deref() == Some(clean))
            .ok_or_else(|| format!("no record for {clean}"))?;
        if !r.loaded_external.is_empty() {
            return Err(format!("{clean} loads {:?}", r.loaded_external));
        }
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("3 actor rows exact, 3 clean senders, {} messages in {elapsed:?}", parsed.len()))
}

/// The public-service rule over every combination of answers.
fn ac2() -> Outcome {
    let started = Instant::now();
    let mut wrong = Vec::new();
    for bits in 0u8..16 {
        let c = [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0];
        let expected = c.iter().filter(|b| **b).count() >= 2 && (c[0] || c[3]);
        if classify_public_service(c[0], c[1], c[2], c[3]) != expected {
            wrong.push(c);
        }
    }
    let elapsed = started.elapsed();
    if !wrong.is_empty() {
        return Err(format!("wrong on {wrong:?}"));
    }
    if elapsed >= Duration::from_millis(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("16/16 combinations in {elapsed:?}"))
}

/// Ten sites ingested with `trackaudit web`, ranked with `trackaudit report`.
fn ac3(tmp: &Path) -> Outcome {
    let want: [(&str, u64); 10] = [
        ("cucugnan.fr", 33),
        ("laposte.fr", 32),
        ("gresse-en-vercors.fr", 29),
        ("ccimp.com", 22),
        ("fleurat.over-blog.fr", 20),
        ("lesgauloisdeclemencey.over-blog.com", 18),
        ("mjc76lillebonne.over-blog.com", 18),
        ("fontenaytorcy.over-blog.com", 17),
        ("nantesstnazaire.cci.fr", 15),
        ("www.savoie.cci.fr", 14),
    ];
    // Fed in reverse so the ranking, not the input order, decides.
    let rows: Vec<(&str, usize)> = want.iter().rev().map(|(h, n)| (*h, *n as usize)).collect();
    let (captures, out_dir, table) = (tmp.join("ac3/captures"), tmp.join("ac3/out"), tmp.join("ac3/top.csv"));
    write_all(&captures, &top_sites_captures(&rows));
    expect_exit(&trackaudit(&["web", "--ingest", p(&captures), "--out", p(&out_dir)]), 0, "web --ingest")?;
    let out = trackaudit(&["report", "--from", p(&out_dir), "--table", "top-sites", "--top", "10", "--out", p(&table)]);
    expect_exit(&out, 0, "report")?;
    let got: Vec<(String, u64)> =
        read_table::<TopSiteRow>(&table)?.into_iter().map(|r| (host_of(&r.site).to_string(), r.third_cookies)).collect();
    let want: Vec<(String, u64)> = want.iter().map(|(h, n)| (h.to_string(), *n)).collect();
    if got != want {
        return Err(format!("ranking {got:?}, wanted {want:?}"));
    }
    Ok("10 rows in order with counts exact, tie broken alphabetically".into())
}

/// Per-domain tallies of an engineered capture set via `trackaudit report`.
fn ac4(tmp: &Path) -> Outcome {
    let want: [(&str, u64, u64, u64); 5] = [
        ("google.com", 89, 281, 1435),
        ("doubleclick.net", 64, 468, 767),
        ("youtube.com", 63, 351, 456),
        ("xiti.com", 40, 193, 121),
        ("facebook.com", 4, 166, 704),
    ];
    let rows: Vec<(&str, usize, usize, usize)> =
        want.iter().map(|(d, f, t, r)| (*d, *f as usize, *t as usize, *r as usize)).collect();
    let (captures, out_dir, table) = (tmp.join("ac4/captures"), tmp.join("ac4/out"), tmp.join("ac4/domains.csv"));
    write_all(&captures, &tally_captures(&rows, 40));
    expect_exit(&trackaudit(&["web", "--ingest", p(&captures), "--out", p(&out_dir)]), 0, "web --ingest")?;
    let out = trackaudit(&["report", "--from", p(&out_dir), "--table", "domains", "--out", p(&table)]);
    expect_exit(&out, 0, "report")?;
    let got: BTreeMap<String, (u64, u64, u64)> = read_table::<DomainTally>(&table)?
        .into_iter()
        .map(|t| (t.domain.as_str().to_string(), (t.first_cookies, t.third_cookies, t.third_requests)))
        .collect();
    let want: BTreeMap<String, (u64, u64, u64)> = want.iter().map(|(d, f, t, r)| (d.to_string(), (*f, *t, *r))).collect();
    if got != want {
        return Err(format!("tallies {got:?}, wanted {want:?}"));
    }
    Ok("5 domains, all three counts exact, no extra domains".into())
}

/// Scanned, labeled apps rendered as the entity share table.
fn ac5(tmp: &Path) -> Outcome {
    let dumps = entity_split_dumps(&ENTITY_SPLIT_PLAN, &bundled_signatures());
    let dir = tmp.join("ac5/dumps");
    let files: Vec<(String, String)> =
        dumps.iter().map(|d| (format!("{}.json", d.app_id), serde_json::to_string(d).unwrap())).collect();
    write_all(&dir, &files);
    let mut log = String::from("app_id,c1,c2,c3,c4,decision\n");
    for d in &dumps {
        log.push_str(&format!("{},y,n,n,y,public-service\n", d.app_id));
    }
    let (log_path, apps, table) = (tmp.join("ac5/labels.csv"), tmp.join("ac5/apps.json"), tmp.join("ac5/entities.csv"));
    std::fs::write(&log_path, log).unwrap();
    let out = trackaudit(&["apk", "scan", "--dumps", p(&dir), "--out", p(&apps), "--labels", p(&log_path)]);
    expect_exit(&out, 0, "apk scan")?;
    let out = trackaudit(&["report", "--from", p(&apps), "--table", "entities", "--out", p(&table)]);
    expect_exit(&out, 0, "report")?;
    let got: Vec<(String, u64)> = read_table::<EntityShare>(&table)?.into_iter().map(|r| (r.entity, r.percent)).collect();
    let want: Vec<(String, u64)> =
        [("Google", 54), ("Autres", 31), ("Facebook", 14), ("Microsoft", 1)].iter().map(|(e, n)| (e.to_string(), *n)).collect();
    if got != want {
        return Err(format!("shares {got:?}, wanted {want:?}"));
    }
    let sum: u64 = got.iter().map(|(_, n)| n).sum();
    if sum != 100 {
        return Err(format!("percentages sum to {sum}"));
    }
    Ok("Google 54, Autres 31, Facebook 14, Microsoft 1 (sum 100)".into())
}

/// The property suite, 256 cases per property.
fn ac6() -> Outcome {
    const CASES: u32 = 256;
    let started = Instant::now();
    let mut failed = Vec::new();
    for (name, property) in SUITE {
        if let Err(e) = property(CASES) {
            failed.push(format!("{name}: {e}"));
        }
    }
    let elapsed = started.elapsed();
    if !failed.is_empty() {
        return Err(failed.join("; "));
    }
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} properties x {CASES} cases, 0 failures in {elapsed:?}", SUITE.len()))
}

/// Local server: pre-consent fetch vs post-consent capture, then a batch
/// with one dead host through `trackaudit web --fetch`.
fn ac7(tmp: &Path) -> Outcome {
    let psl = SuffixList::bundled();
    let server = FixtureServer::start(consent_site_routes());
    let opts = FetchOptions {
        timeout: Duration::from_secs(5),
        resolve: vec![("site.test".into(), server.addr()), ("tracker.test".into(), server.addr())],
        ..FetchOptions::default()
    };
    let site = server.url("site.test", "/");
    let pre = static_fetch(&site, &opts, &psl).map_err(|e| format!("static fetch: {e}"))?;
    // What a browser holds after clicking accept: the same cookies plus
    // the ad cookies the accept flow drops.
    let mut post = CaptureBuilder::new(&pre.site, "post-consent");
    for c in &pre.cookies {
        post = post.cookie(&c.name, &c.cookie_domain);
    }
    let post = post.cookie("IDE", ".doubleclick.net").cookie("_fbp", ".facebook.com");
    let post = ingest_capture(&post.to_json(), &psl).map_err(|e| format!("ingest: {e}"))?;
    let summary = site_report(&pre, Some(&post), &psl).map_err(|e| format!("report: {e}"))?;
    let (pre_third, post_third) = (summary.pre.third_cookies, summary.post.as_ref().map_or(0, |c| c.third_cookies));
    if pre_third == 0 || post_third < pre_third || post_third != pre_third + 2 {
        return Err(format!("third-party cookies pre {pre_third}, post {post_third}"));
    }

    let dead = dead_address();
    let sites = tmp.join("ac7/sites.txt");
    std::fs::create_dir_all(sites.parent().unwrap()).unwrap();
    std::fs::write(&sites, format!("{site}\nhttp://dead.test:{}/\n", dead.port())).unwrap();
    let out_dir = tmp.join("ac7/out");
    let live = format!("site.test={}", server.addr());
    let tracker = format!("tracker.test={}", server.addr());
    let dead_pin = format!("dead.test={dead}");
    let out = trackaudit(&[
        "--timeout", "5", "web", "--fetch", "--sites", p(&sites), "--out", p(&out_dir),
        "--resolve", &live, "--resolve", &tracker, "--resolve", &dead_pin,
    ]);
    expect_exit(&out, 2, "web --fetch with a dead host")?;
    let sessions = std::fs::read_dir(out_dir.join("sessions")).map_err(|e| e.to_string())?.count();
    let errors = read_table::<SiteFailure>(&out_dir.join("errors.csv"))?;
    if sessions != 1 || errors.len() != 1 || errors[0].kind != "connect" || !errors[0].site.contains("dead.test") {
        return Err(format!("{sessions} session(s), errors {errors:?}"));
    }
    Ok(format!(
        "third-party cookies pre {pre_third} -> post {post_third}; dead host: exit 2, 1 session, error kind {}",
        errors[0].kind
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let root: PathBuf = tmp.path().to_path_buf();
    let criteria: Vec<(&str, Check)> = vec![
        ("AC1 email actors table", Box::new(|| ac1(&root))),
        ("AC2 public-service rule truth table", Box::new(ac2)),
        ("AC3 top sites by third-party cookies", Box::new(|| ac3(&root))),
        ("AC4 per-domain tallies", Box::new(|| ac4(&root))),
        ("AC5 tracker share by entity", Box::new(|| ac5(&root))),
        ("AC6 property suite", Box::new(ac6)),
        ("AC7 two-phase capture and dead host", Box::new(|| ac7(&root))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
