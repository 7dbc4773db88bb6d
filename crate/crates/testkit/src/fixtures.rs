//! Fixture corpora: email messages, capture files and app dumps.

use std::path::PathBuf;

use serde_json::{json, Value};
use trackaudit_core::app::AppDump;
use trackaudit_core::trackerdb::TrackerSignature;

use crate::fixtures_dir;

pub fn emails_dir() -> PathBuf {
    fixtures_dir().join("emails")
}

/// Same-organization domain groups for the email corpus.
pub fn aliases_path() -> PathBuf {
    fixtures_dir().join("aliases.txt")
}

/// Every `.eml` fixture as `(file stem, raw bytes)`, sorted by stem.
pub fn email_corpus() -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(emails_dir())
        .expect("emails fixture dir")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "eml"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, std::fs::read(&p).expect("read eml"))
        })
        .collect();
    out.sort();
    out
}

pub const FETCHED_AT: &str = "2021-03-01T10:00:00Z";

/// Builds capture-file JSON as an external browser tool would write it.
#[derive(Debug, Clone)]
pub struct CaptureBuilder {
    site: String,
    phase: String,
    cookies: Vec<Value>,
    requests: Vec<Value>,
    html: Option<String>,
}

impl CaptureBuilder {
    pub fn new(site: &str, phase: &str) -> Self {
        CaptureBuilder { site: site.into(), phase: phase.into(), cookies: Vec::new(), requests: Vec::new(), html: None }
    }

    pub fn cookie(mut self, name: &str, domain: &str) -> Self {
        let n = self.cookies.len();
        self.cookies.push(json!({"name": name, "domain": domain, "value": format!("v{n}"), "expires": 1_700_000_000 + n}));
        self
    }

    /// `n` cookies named `{prefix}{i}`.
    pub fn cookies(mut self, prefix: &str, domain: &str, n: usize) -> Self {
        for i in 0..n {
            self = self.cookie(&format!("{prefix}{i}"), domain);
        }
        self
    }

    pub fn request(mut self, url: &str, kind: &str) -> Self {
        self.requests.push(json!({"url": url, "kind": kind}));
        self
    }

    /// `n` image requests to distinct paths on `host`.
    pub fn requests(mut self, host: &str, n: usize) -> Self {
        for i in 0..n {
            self = self.request(&format!("https://{host}/r/{i}.gif"), "image");
        }
        self
    }

    pub fn html(mut self, html: &str) -> Self {
        self.html = Some(html.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({
            "schema_version": 1,
            "site": self.site,
            "phase": self.phase,
            "fetched_at": FETCHED_AT,
            "cookies": self.cookies,
            "requests": self.requests,
        });
        if let Some(h) = &self.html {
            v["html"] = json!(h);
        }
        serde_json::to_string_pretty(&v).unwrap()
    }
}

/// Advertising domains the top-sites fixture spreads its cookies over.
pub const AD_COOKIE_DOMAINS: [&str; 6] =
    [".doubleclick.net", ".yahoo.com", ".360yield.com", ".rubiconproject.com", ".casalemedia.com", ".openx.net"];

/// One pre-consent and one post-consent capture per `(host, n)`: the
/// post-consent capture holds `n` distinct third-party cookies, the
/// pre-consent one fewer. Returned as `(file name, json)`.
pub fn top_sites_captures(rows: &[(&str, usize)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (host, n) in rows {
        let site = format!("https://{host}/");
        let own = format!(".{}", host.trim_start_matches("www."));
        let spread = |mut b: CaptureBuilder, count: usize| {
            for i in 0..count {
                b = b.cookie(&format!("ad{i}"), AD_COOKIE_DOMAINS[i % AD_COOKIE_DOMAINS.len()]);
            }
            b.request("https://fonts.googleapis.com/css?family=Lato", "stylesheet")
        };
        let pre = spread(CaptureBuilder::new(&site, "pre-consent").cookie("session", &own), n / 2);
        let post = spread(CaptureBuilder::new(&site, "post-consent").cookie("session", &own).cookie("consent", &own), *n);
        out.push((format!("{host}-pre.json"), pre.to_json()));
        out.push((format!("{host}-post.json"), post.to_json()));
    }
    out
}

/// Publisher sites that embed the tally fixture's third parties.
pub fn publisher_sites(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("https://www.editeur{i:02}.fr/")).collect()
}

/// Captures engineered so that each `(domain, first, third, requests)`
/// row is exactly its per-domain tally: `first` cookies on the domain's
/// own site, `third` cookies and `requests` requests spread round-robin
/// over publisher sites. Every site also gets an empty pre-consent capture
/// so it summarizes cleanly; tallies rank on the post-consent one.
pub fn tally_captures(rows: &[(&str, usize, usize, usize)], publishers: usize) -> Vec<(String, String)> {
    let sites = publisher_sites(publishers);
    let mut builders: Vec<CaptureBuilder> = sites.iter().map(|s| CaptureBuilder::new(s, "post-consent")).collect();
    let mut out = Vec::new();
    for (domain, first, third, requests) in rows {
        let site = format!("https://www.{domain}/");
        let own = CaptureBuilder::new(&site, "post-consent").cookies("f", &format!(".{domain}"), *first);
        out.push((format!("www.{domain}-pre.json"), CaptureBuilder::new(&site, "pre-consent").to_json()));
        out.push((format!("www.{domain}-post.json"), own.to_json()));
        let tag = domain.replace('.', "_");
        for i in 0..*third {
            let b = builders[i % publishers].clone();
            builders[i % publishers] = b.cookie(&format!("{tag}_{i}"), &format!(".{domain}"));
        }
        for i in 0..*requests {
            let b = builders[i % publishers].clone();
            builders[i % publishers] = b.request(&format!("https://cdn.{domain}/t/{i}.js"), "script");
        }
    }
    for (site, b) in sites.iter().zip(builders) {
        let host = site.trim_start_matches("https://").trim_end_matches('/');
        out.push((format!("{host}-pre.json"), CaptureBuilder::new(site, "pre-consent").to_json()));
        out.push((format!("{host}-post.json"), b.to_json()));
    }
    out
}

/// Tracker occurrence plan for the identity-table fixture: `(tracker
/// name, number of apps embedding it)`. Google 54, unlisted 31,
/// Facebook 14, Microsoft 1.
pub const ENTITY_SPLIT_PLAN: [(&str, usize); 14] = [
    ("Google Firebase Analytics", 20),
    ("Google CrashLytics", 14),
    ("Google AdMob", 10),
    ("Google Analytics", 6),
    ("Google Tag Manager", 4),
    ("Facebook Login", 8),
    ("Facebook Share", 4),
    ("Facebook Analytics", 2),
    ("Microsoft Visual Studio App Center Crashes", 1),
    ("OneSignal", 12),
    ("Batch", 8),
    ("Adjust", 6),
    ("Matomo (Piwik)", 3),
    ("Smartadserver", 2),
];

/// App dumps where app `i` embeds every planned tracker with count > `i`,
/// each through one class under the tracker's first code prefix.
pub fn entity_split_dumps(plan: &[(&str, usize)], sigs: &[TrackerSignature]) -> Vec<AppDump> {
    let apps = plan.iter().map(|(_, n)| *n).max().unwrap_or(0);
    (0..apps)
        .map(|i| {
            let mut classes = vec![format!("fr.gouv.app{i:02}.MainActivity")];
            for (name, n) in plan {
                if i < *n {
                    let sig = sigs.iter().find(|s| s.name == *name).unwrap_or_else(|| panic!("no signature {name}"));
                    classes.push(format!("{}.Entry", sig.code_prefixes[0]));
                }
            }
            AppDump {
                app_id: format!("fr.gouv.app{i:02}"),
                title: format!("Service public {i:02}"),
                developer: "Etat".into(),
                website: Some(format!("https://app{i:02}.gouv.fr/")),
                version: Some("1.0".into()),
                keyword: Some("gouv".into()),
                classes,
                permissions: vec!["android.permission.INTERNET".into()],
            }
        })
        .collect()
}
