use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::banner::locate_with_defaults;
use super::{classify_party, CaptureSession, CookieRecord, Phase, RequestRecord, ResourceKind, WebError};
use crate::digest::sha256_hex;
use crate::domain::{url_host, SuffixList};

pub const CAPTURE_SCHEMA_VERSION: u32 = 1;

/// Capture file written by an external browser-automation tool.
///
/// ```json
/// {"schema_version": 1, "site": "https://www.laposte.fr/", "phase": "pre-consent",
///  "fetched_at": "2021-03-01T10:00:00Z",
///  "cookies": [{"name": "IDE", "domain": ".doubleclick.net", "value": "...", "expires": 1700000000}],
///  "requests": [{"url": "https://fonts.googleapis.com/css", "kind": "style"}],
///  "html": "<html>...</html>"}
/// ```
///
/// `expires` is epoch seconds or an RFC 3339 string; `html` is optional and
/// only feeds the consent-button probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub site: String,
    pub phase: Phase,
    pub fetched_at: DateTime<Utc>,
    #[serde(default)]
    pub cookies: Vec<CapturedCookie>,
    #[serde(default)]
    pub requests: Vec<CapturedRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
}

fn default_version() -> u32 {
    CAPTURE_SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedCookie {
    pub name: String,
    pub domain: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub expires: Option<Expiry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expiry {
    Epoch(f64),
    Text(String),
}

impl Expiry {
    fn to_datetime(&self) -> Option<DateTime<Utc>> {
        match self {
            // Browsers report -1 for session cookies.
            Expiry::Epoch(secs) if *secs > 0.0 => Utc.timestamp_opt(*secs as i64, 0).single(),
            Expiry::Epoch(_) => None,
            Expiry::Text(s) => DateTime::parse_from_rfc3339(s).ok().map(|d| d.with_timezone(&Utc)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedRequest {
    pub url: String,
    #[serde(default)]
    pub kind: String,
}

/// Parses a capture file into a classified session. Cookie values are hashed
/// here and dropped. Cookies and requests whose host has no registrable
/// domain are skipped with a warning.
pub fn ingest_capture(json: &str, psl: &SuffixList) -> Result<CaptureSession, WebError> {
    let file: CaptureFile = serde_json::from_str(json)?;
    if file.schema_version != CAPTURE_SCHEMA_VERSION {
        return Err(WebError::SchemaVersion(file.schema_version));
    }
    let site_url = Url::parse(file.site.trim()).map_err(|e| WebError::BadSite(file.site.clone(), e.to_string()))?;
    let host = url_host(&site_url).map_err(|e| WebError::SiteDomain { site: file.site.clone(), source: e })?;
    let site_domain =
        psl.registrable_domain(&host).map_err(|e| WebError::SiteDomain { site: file.site.clone(), source: e })?;

    let mut cookies = Vec::with_capacity(file.cookies.len());
    for c in &file.cookies {
        match classify_party(&c.domain, &site_domain, psl) {
            Ok(party) => cookies.push(CookieRecord {
                name: c.name.clone(),
                cookie_domain: c.domain.trim().to_ascii_lowercase(),
                value_hash: sha256_hex(&c.value),
                expires: c.expires.as_ref().and_then(Expiry::to_datetime),
                party,
            }),
            Err(e) => log::warn!("{}: skipping cookie {:?} on {:?}: {e}", file.site, c.name, c.domain),
        }
    }

    let mut requests = Vec::with_capacity(file.requests.len());
    for r in &file.requests {
        let host = match Url::parse(&r.url).ok().and_then(|u| url_host(&u).ok()) {
            Some(h) => h,
            None => {
                log::warn!("{}: skipping request without host", file.site);
                continue;
            }
        };
        match classify_party(&host, &site_domain, psl) {
            Ok(party) => requests.push(RequestRecord { host, party, resource_kind: ResourceKind::from_label(&r.kind) }),
            Err(e) => log::warn!("{}: skipping request to {host:?}: {e}", file.site),
        }
    }

    Ok(CaptureSession {
        site: file.site.trim().to_string(),
        site_domain,
        phase: file.phase,
        fetched_at: file.fetched_at,
        cookies,
        requests,
        banner: file.html.as_deref().map(locate_with_defaults),
    })
}
