//! Website channel: capture sessions before and after consent, first/third
//! party classification, the consent-button locator and a static fetcher.

mod banner;
mod capture;
mod cookies;
mod fetch;
mod summary;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, RegistrableDomain, SuffixList};

pub use banner::{
    locate_consent_button, locate_with_defaults, BannerProbe, Strategy, DEFAULT_ACCEPT_TEXTS, DEFAULT_CLASS_HINTS,
    DEFAULT_ID_HINTS,
};
pub use capture::{ingest_capture, CaptureFile, CapturedCookie, CapturedRequest, CAPTURE_SCHEMA_VERSION};
pub use cookies::{cookie_key, dedupe_cookies, parse_set_cookie, SetCookie};
pub use fetch::{fetch_batch, static_fetch, BatchOutcome, FetchOptions, SiteFailure};
pub use summary::{site_report, PhaseCounts, PhaseDelta, SiteSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    #[serde(alias = "pre")]
    PreConsent,
    #[serde(alias = "post")]
    PostConsent,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::PreConsent => "pre-consent",
            Phase::PostConsent => "post-consent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    First,
    Third,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::First => "first",
            Party::Third => "third",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Document,
    Image,
    Style,
    Script,
    Other,
}

impl ResourceKind {
    /// Lenient mapping of capture-tool kind names.
    pub fn from_label(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "document" | "main_frame" | "sub_frame" | "iframe" | "frame" => ResourceKind::Document,
            "image" | "img" | "imageset" | "media" | "font" => ResourceKind::Image,
            "style" | "stylesheet" | "css" => ResourceKind::Style,
            "script" | "js" => ResourceKind::Script,
            _ => ResourceKind::Other,
        }
    }
}

/// One cookie seen in a capture. The raw value is never kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CookieRecord {
    pub name: String,
    /// Domain as set, a leading dot included.
    pub cookie_domain: String,
    pub value_hash: String,
    pub expires: Option<DateTime<Utc>>,
    pub party: Party,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub host: String,
    pub party: Party,
    pub resource_kind: ResourceKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureSession {
    pub site: String,
    pub site_domain: RegistrableDomain,
    pub phase: Phase,
    pub fetched_at: DateTime<Utc>,
    pub cookies: Vec<CookieRecord>,
    pub requests: Vec<RequestRecord>,
    /// Consent-button probe over the captured HTML, when HTML was captured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub banner: Option<BannerProbe>,
}

impl CaptureSession {
    /// Hostname of `site`, used as the display name in reports.
    pub fn site_host(&self) -> &str {
        site_host(&self.site)
    }
}

fn site_host(site: &str) -> &str {
    let rest = site.split_once("://").map(|(_, r)| r).unwrap_or(site);
    let end = rest.find(['/', '?', '#', ':']).unwrap_or(rest.len());
    &rest[..end]
}

#[derive(Debug, Error)]
pub enum WebError {
    #[error("site {0:?}: {1}")]
    BadSite(String, String),
    #[error("site {site}: {source}")]
    SiteDomain {
        site: String,
        #[source]
        source: DomainError,
    },
    #[error("DNS resolution failed: {0}")]
    DnsFailure(String),
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("HTTP status {0}")]
    HttpError(u16),
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("more than {0} redirects")]
    TooManyRedirects(usize),
    #[error("request failed: {0}")]
    Request(String),
    #[error("unsupported capture schema version {0}")]
    SchemaVersion(u32),
    #[error("malformed capture: {0}")]
    Capture(#[from] serde_json::Error),
    #[error("phase mismatch: {0}")]
    PhaseMismatch(String),
    #[error("sessions belong to different sites: {0} and {1}")]
    SiteMismatch(String, String),
}

impl WebError {
    /// Short machine-friendly tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            WebError::BadSite(..) | WebError::SiteDomain { .. } => "bad-site",
            WebError::DnsFailure(_) => "dns",
            WebError::Connect(_) => "connect",
            WebError::HttpError(_) => "http",
            WebError::Timeout(_) => "timeout",
            WebError::TooManyRedirects(_) => "redirects",
            WebError::Request(_) => "request",
            WebError::SchemaVersion(_) | WebError::Capture(_) => "capture",
            WebError::PhaseMismatch(_) => "phase",
            WebError::SiteMismatch(..) => "site-mismatch",
        }
    }
}

/// First party iff `host` shares the site's registrable domain. A leading
/// dot (cookie domain syntax) is ignored.
pub fn classify_party(host: &str, site_domain: &RegistrableDomain, psl: &SuffixList) -> Result<Party, DomainError> {
    let domain = psl.registrable_domain(host.trim_start_matches('.'))?;
    Ok(if &domain == site_domain { Party::First } else { Party::Third })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn party_examples() {
        let psl = SuffixList::bundled();
        let laposte = psl.registrable_domain("laposte.fr").unwrap();
        let cucugnan = psl.registrable_domain("cucugnan.fr").unwrap();
        assert_eq!(classify_party(".doubleclick.net", &laposte, &psl).unwrap(), Party::Third);
        assert_eq!(classify_party("www.laposte.fr", &laposte, &psl).unwrap(), Party::First);
        assert_eq!(classify_party(".laposte.fr", &laposte, &psl).unwrap(), Party::First);
        assert_eq!(classify_party("fonts.googleapis.com", &cucugnan, &psl).unwrap(), Party::Third);
        assert!(classify_party("", &laposte, &psl).is_err());
    }

    #[test]
    fn site_host_strips_scheme_and_path() {
        assert_eq!(site_host("https://www.laposte.fr/x?y"), "www.laposte.fr");
        assert_eq!(site_host("http://site.test:8080/"), "site.test");
        assert_eq!(site_host("cucugnan.fr"), "cucugnan.fr");
    }

    #[test]
    fn kind_labels() {
        assert_eq!(ResourceKind::from_label("Stylesheet"), ResourceKind::Style);
        assert_eq!(ResourceKind::from_label("xhr"), ResourceKind::Other);
        assert_eq!(ResourceKind::from_label("sub_frame"), ResourceKind::Document);
    }
}
