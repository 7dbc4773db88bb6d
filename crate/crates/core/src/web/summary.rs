use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cookies::dedupe_cookies;
use super::{CaptureSession, Party, Phase, WebError};
use crate::domain::{RegistrableDomain, SuffixList};

/// Per-phase counts, cookies deduplicated first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub first_cookies: u64,
    pub third_cookies: u64,
    pub first_requests: u64,
    pub third_requests: u64,
}

/// Post minus pre.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseDelta {
    pub first_cookies: i64,
    pub third_cookies: i64,
    pub first_requests: i64,
    pub third_requests: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSummary {
    pub site: String,
    pub site_domain: RegistrableDomain,
    pub pre: PhaseCounts,
    pub post: Option<PhaseCounts>,
    pub delta: Option<PhaseDelta>,
    /// Third-party cookie domains over both phases.
    pub third_cookie_domains: BTreeSet<RegistrableDomain>,
    /// Third-party request domains over both phases.
    pub third_request_domains: BTreeSet<RegistrableDomain>,
}

impl SiteSummary {
    /// Count used for rankings: post-consent when captured, else pre-consent.
    pub fn ranking_third_cookies(&self) -> u64 {
        self.post.unwrap_or(self.pre).third_cookies
    }

    pub fn third_party_domains(&self) -> BTreeSet<RegistrableDomain> {
        self.third_cookie_domains.union(&self.third_request_domains).cloned().collect()
    }
}

fn counts(
    s: &CaptureSession,
    psl: &SuffixList,
    cookie_domains: &mut BTreeSet<RegistrableDomain>,
    request_domains: &mut BTreeSet<RegistrableDomain>,
) -> PhaseCounts {
    let mut c = PhaseCounts::default();
    for cookie in dedupe_cookies(&s.cookies, psl) {
        match cookie.party {
            Party::First => c.first_cookies += 1,
            Party::Third => {
                c.third_cookies += 1;
                if let Ok(d) = psl.registrable_domain(cookie.cookie_domain.trim_start_matches('.')) {
                    cookie_domains.insert(d);
                }
            }
        }
    }
    for r in &s.requests {
        match r.party {
            Party::First => c.first_requests += 1,
            Party::Third => {
                c.third_requests += 1;
                if let Ok(d) = psl.registrable_domain(&r.host) {
                    request_domains.insert(d);
                }
            }
        }
    }
    c
}

fn diff(a: u64, b: u64) -> i64 {
    a as i64 - b as i64
}

/// Summarizes a site from its pre-consent session and, optionally, its
/// post-consent session.
pub fn site_report(
    pre: &CaptureSession,
    post: Option<&CaptureSession>,
    psl: &SuffixList,
) -> Result<SiteSummary, WebError> {
    if pre.phase != Phase::PreConsent {
        return Err(WebError::PhaseMismatch(format!("{}: first session is {}", pre.site, pre.phase)));
    }
    if let Some(p) = post {
        if p.phase != Phase::PostConsent {
            return Err(WebError::PhaseMismatch(format!("{}: second session is {}", p.site, p.phase)));
        }
        if p.site_domain != pre.site_domain {
            return Err(WebError::SiteMismatch(pre.site.clone(), p.site.clone()));
        }
    }
    let mut cookie_domains = BTreeSet::new();
    let mut request_domains = BTreeSet::new();
    let pre_counts = counts(pre, psl, &mut cookie_domains, &mut request_domains);
    let post_counts = post.map(|p| counts(p, psl, &mut cookie_domains, &mut request_domains));
    let delta = post_counts.map(|b| PhaseDelta {
        first_cookies: diff(b.first_cookies, pre_counts.first_cookies),
        third_cookies: diff(b.third_cookies, pre_counts.third_cookies),
        first_requests: diff(b.first_requests, pre_counts.first_requests),
        third_requests: diff(b.third_requests, pre_counts.third_requests),
    });
    Ok(SiteSummary {
        site: pre.site_host().to_string(),
        site_domain: pre.site_domain.clone(),
        pre: pre_counts,
        post: post_counts,
        delta,
        third_cookie_domains: cookie_domains,
        third_request_domains: request_domains,
    })
}
