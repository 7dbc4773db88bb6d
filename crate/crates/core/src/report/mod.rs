//! Cross-channel aggregation: site rankings, per-domain tallies, entity
//! shares and their CSV / JSONL / Markdown exports.

mod export;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export, parse_csv, Cell, Format, Tabular};
use export::{field_int, field_list, field_text};

use crate::app::EntityShare;
use crate::domain::{RegistrableDomain, SuffixList};
use crate::email::ActorRow;
use crate::par;
use crate::web::{dedupe_cookies, site_report, CaptureSession, Party, Phase, SiteFailure, SiteSummary, WebError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported format {0:?} (expected csv, jsonl or md)")]
    UnsupportedFormat(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of the top-sites table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopSiteRow {
    pub site: String,
    pub third_cookies: u64,
    pub cookie_domains: Vec<String>,
    pub request_domains: Vec<String>,
}

impl From<&SiteSummary> for TopSiteRow {
    fn from(s: &SiteSummary) -> Self {
        TopSiteRow {
            site: s.site.clone(),
            third_cookies: s.ranking_third_cookies(),
            cookie_domains: s.third_cookie_domains.iter().map(|d| d.as_str().to_string()).collect(),
            request_domains: s.third_request_domains.iter().map(|d| d.as_str().to_string()).collect(),
        }
    }
}

impl Tabular for TopSiteRow {
    fn columns() -> &'static [&'static str] {
        &["site", "count", "cookies", "requests"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.site.clone()),
            Cell::Int(self.third_cookies as i64),
            Cell::List(self.cookie_domains.clone()),
            Cell::List(self.request_domains.clone()),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(TopSiteRow {
            site: field_text(f, 0)?,
            third_cookies: field_int(f, 1)?,
            cookie_domains: field_list(f, 2)?,
            request_domains: field_list(f, 3)?,
        })
    }
}

/// The `n` sites with the most third-party cookies, most first; ties go
/// to the alphabetically smaller site name.
pub fn top_sites_by_third_cookies(summaries: &[SiteSummary], n: usize) -> Vec<TopSiteRow> {
    let mut rows: Vec<TopSiteRow> = summaries.iter().map(TopSiteRow::from).collect();
    rows.sort_by(|a, b| b.third_cookies.cmp(&a.third_cookies).then_with(|| a.site.cmp(&b.site)));
    rows.truncate(n);
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainTally {
    pub domain: RegistrableDomain,
    pub first_cookies: u64,
    pub third_cookies: u64,
    pub third_requests: u64,
}

impl DomainTally {
    pub fn total(&self) -> u64 {
        self.first_cookies + self.third_cookies + self.third_requests
    }
}

impl Tabular for DomainTally {
    fn columns() -> &'static [&'static str] {
        &["domain", "first_cookies", "third_cookies", "third_requests"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.domain.as_str().to_string()),
            Cell::Int(self.first_cookies as i64),
            Cell::Int(self.third_cookies as i64),
            Cell::Int(self.third_requests as i64),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(DomainTally {
            domain: RegistrableDomain::from_serialized(&field_text(f, 0)?).map_err(|e| e.to_string())?,
            first_cookies: field_int(f, 1)?,
            third_cookies: field_int(f, 2)?,
            third_requests: field_int(f, 3)?,
        })
    }
}

/// Mergeable per-domain counters. `merge` is associative and commutative,
/// so partial tallies from parallel workers combine in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TallyAccumulator {
    counts: BTreeMap<RegistrableDomain, [u64; 3]>,
}

impl TallyAccumulator {
    /// Adds one session; its cookies are deduplicated first.
    pub fn add_session(&mut self, session: &CaptureSession, psl: &SuffixList) {
        for cookie in dedupe_cookies(&session.cookies, psl) {
            let Ok(domain) = psl.registrable_domain(cookie.cookie_domain.trim_start_matches('.')) else { continue };
            let slot = self.counts.entry(domain).or_default();
            match cookie.party {
                Party::First => slot[0] += 1,
                Party::Third => slot[1] += 1,
            }
        }
        for request in session.requests.iter().filter(|r| r.party == Party::Third) {
            let Ok(domain) = psl.registrable_domain(&request.host) else { continue };
            self.counts.entry(domain).or_default()[2] += 1;
        }
    }

    pub fn merge(mut self, other: TallyAccumulator) -> TallyAccumulator {
        for (domain, c) in other.counts {
            let slot = self.counts.entry(domain).or_default();
            for i in 0..3 {
                slot[i] += c[i];
            }
        }
        self
    }

    /// Tallies by total, largest first, then by domain name.
    pub fn finish(self) -> Vec<DomainTally> {
        let mut out: Vec<DomainTally> = self
            .counts
            .into_iter()
            .map(|(domain, c)| DomainTally { domain, first_cookies: c[0], third_cookies: c[1], third_requests: c[2] })
            .collect();
        out.sort_by(|a, b| b.total().cmp(&a.total()).then_with(|| a.domain.cmp(&b.domain)));
        out
    }
}

/// Per-domain cookie and request counts over `sessions`.
pub fn domain_tallies(sessions: &[CaptureSession], psl: &SuffixList) -> Vec<DomainTally> {
    par::fold_merge(
        sessions,
        TallyAccumulator::default,
        |mut acc, s| {
            acc.add_session(s, psl);
            acc
        },
        TallyAccumulator::merge,
    )
    .finish()
}

fn site_key(s: &CaptureSession) -> String {
    s.site_host().to_ascii_lowercase()
}

/// One session per site for cross-site counts: the post-consent capture
/// when there is one, else the pre-consent capture. Ordered by site.
pub fn ranking_sessions(sessions: &[CaptureSession]) -> Vec<&CaptureSession> {
    let mut chosen: BTreeMap<String, &CaptureSession> = BTreeMap::new();
    for s in sessions {
        let key = site_key(s);
        match chosen.get(&key) {
            Some(existing) if existing.phase == Phase::PostConsent || s.phase == Phase::PreConsent => {}
            _ => {
                chosen.insert(key, s);
            }
        }
    }
    chosen.into_values().collect()
}

/// Pairs each site's pre- and post-consent sessions and summarizes them.
/// Sites lacking a pre-consent session are reported as errors.
pub fn summarize_sessions(sessions: &[CaptureSession], psl: &SuffixList) -> (Vec<SiteSummary>, Vec<(String, WebError)>) {
    let mut by_site: BTreeMap<String, (Option<&CaptureSession>, Option<&CaptureSession>)> = BTreeMap::new();
    for s in sessions {
        let slot = by_site.entry(site_key(s)).or_default();
        match s.phase {
            Phase::PreConsent if slot.0.is_none() => slot.0 = Some(s),
            Phase::PostConsent if slot.1.is_none() => slot.1 = Some(s),
            _ => log::warn!("{}: extra {} session ignored", s.site, s.phase),
        }
    }
    let mut summaries = Vec::new();
    let mut errors = Vec::new();
    for (site, (pre, post)) in by_site {
        match pre {
            Some(pre) => match site_report(pre, post, psl) {
                Ok(s) => summaries.push(s),
                Err(e) => errors.push((site, e)),
            },
            None => errors.push((site, WebError::PhaseMismatch("no pre-consent session".into()))),
        }
    }
    (summaries, errors)
}

/// Total third-party cookies across sessions, each deduplicated.
pub fn total_third_cookies(sessions: &[CaptureSession], psl: &SuffixList) -> u64 {
    sessions
        .iter()
        .map(|s| dedupe_cookies(&s.cookies, psl).iter().filter(|c| c.party == Party::Third).count() as u64)
        .sum()
}

impl Tabular for SiteSummary {
    fn columns() -> &'static [&'static str] {
        &[
            "site",
            "site_domain",
            "pre_first_cookies",
            "pre_third_cookies",
            "pre_first_requests",
            "pre_third_requests",
            "post_first_cookies",
            "post_third_cookies",
            "post_first_requests",
            "post_third_requests",
            "third_cookie_domains",
            "third_request_domains",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        let post = |f: fn(&crate::web::PhaseCounts) -> u64| match &self.post {
            Some(p) => Cell::Int(f(p) as i64),
            None => Cell::Text(String::new()),
        };
        vec![
            Cell::Text(self.site.clone()),
            Cell::Text(self.site_domain.as_str().to_string()),
            Cell::Int(self.pre.first_cookies as i64),
            Cell::Int(self.pre.third_cookies as i64),
            Cell::Int(self.pre.first_requests as i64),
            Cell::Int(self.pre.third_requests as i64),
            post(|p| p.first_cookies),
            post(|p| p.third_cookies),
            post(|p| p.first_requests),
            post(|p| p.third_requests),
            Cell::List(self.third_cookie_domains.iter().map(|d| d.as_str().to_string()).collect()),
            Cell::List(self.third_request_domains.iter().map(|d| d.as_str().to_string()).collect()),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        use crate::web::{PhaseCounts, PhaseDelta};
        let domains = |idx| -> Result<BTreeSet<RegistrableDomain>, String> {
            field_list(f, idx)?
                .iter()
                .map(|d| RegistrableDomain::from_serialized(d).map_err(|e| e.to_string()))
                .collect()
        };
        let pre = PhaseCounts {
            first_cookies: field_int(f, 2)?,
            third_cookies: field_int(f, 3)?,
            first_requests: field_int(f, 4)?,
            third_requests: field_int(f, 5)?,
        };
        let post = if f.get(6).is_some_and(|s| s.is_empty()) {
            None
        } else {
            Some(PhaseCounts {
                first_cookies: field_int(f, 6)?,
                third_cookies: field_int(f, 7)?,
                first_requests: field_int(f, 8)?,
                third_requests: field_int(f, 9)?,
            })
        };
        let delta = post.map(|b| PhaseDelta {
            first_cookies: b.first_cookies as i64 - pre.first_cookies as i64,
            third_cookies: b.third_cookies as i64 - pre.third_cookies as i64,
            first_requests: b.first_requests as i64 - pre.first_requests as i64,
            third_requests: b.third_requests as i64 - pre.third_requests as i64,
        });
        Ok(SiteSummary {
            site: field_text(f, 0)?,
            site_domain: RegistrableDomain::from_serialized(&field_text(f, 1)?).map_err(|e| e.to_string())?,
            pre,
            post,
            delta,
            third_cookie_domains: domains(10)?,
            third_request_domains: domains(11)?,
        })
    }
}

impl Tabular for ActorRow {
    fn columns() -> &'static [&'static str] {
        &["actor", "sources"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Text(self.actor.clone()), Cell::List(self.sources.clone())]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(ActorRow { actor: field_text(f, 0)?, sources: field_list(f, 1)? })
    }
}

impl Tabular for EntityShare {
    fn columns() -> &'static [&'static str] {
        &["entity", "percent", "count", "of"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.entity.clone()),
            Cell::Int(self.percent as i64),
            Cell::Int(self.count as i64),
            Cell::Int(self.of as i64),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(EntityShare {
            entity: field_text(f, 0)?,
            percent: field_int(f, 1)?,
            count: field_int(f, 2)?,
            of: field_int(f, 3)?,
        })
    }
}

/// One cookie of the raw web export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCookieRow {
    pub site: String,
    pub name: String,
    pub domain: String,
    pub value_hash: String,
    pub expires: String,
    pub party: String,
    pub phase: String,
}

impl RawCookieRow {
    pub fn from_session(s: &CaptureSession) -> Vec<RawCookieRow> {
        s.cookies
            .iter()
            .map(|c| RawCookieRow {
                site: s.site_host().to_string(),
                name: c.name.clone(),
                domain: c.cookie_domain.clone(),
                value_hash: c.value_hash.clone(),
                expires: c.expires.map(|e| e.to_rfc3339()).unwrap_or_default(),
                party: c.party.to_string(),
                phase: s.phase.to_string(),
            })
            .collect()
    }
}

impl Tabular for RawCookieRow {
    fn columns() -> &'static [&'static str] {
        &["site", "name", "domain", "value_hash", "expires", "party", "phase"]
    }

    fn cells(&self) -> Vec<Cell> {
        [&self.site, &self.name, &self.domain, &self.value_hash, &self.expires, &self.party, &self.phase]
            .into_iter()
            .map(|s| Cell::Text(s.clone()))
            .collect()
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(RawCookieRow {
            site: field_text(f, 0)?,
            name: field_text(f, 1)?,
            domain: field_text(f, 2)?,
            value_hash: field_text(f, 3)?,
            expires: field_text(f, 4)?,
            party: field_text(f, 5)?,
            phase: field_text(f, 6)?,
        })
    }
}

impl Tabular for SiteFailure {
    fn columns() -> &'static [&'static str] {
        &["site", "kind", "detail"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Text(self.site.clone()), Cell::Text(self.kind.clone()), Cell::Text(self.detail.clone())]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        Ok(SiteFailure { site: field_text(f, 0)?, kind: field_text(f, 1)?, detail: field_text(f, 2)? })
    }
}
