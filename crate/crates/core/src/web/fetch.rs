use std::error::Error as _;
use std::net::SocketAddr;
use std::sync::Once;
use std::time::Duration;

use chrono::Utc;
use reqwest::blocking::Client;
use reqwest::header::{LOCATION, SET_COOKIE};
use reqwest::redirect::Policy;
use serde::Serialize;
use url::Url;

use super::banner::locate_with_defaults;
use super::cookies::parse_set_cookie;
use super::{classify_party, CaptureSession, CookieRecord, Phase, RequestRecord, ResourceKind, WebError};
use crate::digest::sha256_hex;
use crate::domain::{url_host, SuffixList};
use crate::email::{extract_urls_with_base, ResourceSource};
use crate::par;

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub redirect_limit: usize,
    pub timeout: Duration,
    /// Fixed host-to-address mappings that bypass DNS.
    pub resolve: Vec<(String, SocketAddr)>,
    pub user_agent: String,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            redirect_limit: 5,
            timeout: Duration::from_secs(30),
            resolve: Vec::new(),
            user_agent: concat!("trackaudit/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

static TLS_PROVIDER: Once = Once::new();

fn client(opts: &FetchOptions) -> Result<Client, WebError> {
    TLS_PROVIDER.call_once(|| {
        // Fails only when another provider was installed first, which is fine.
        let _ = rustls::crypto::ring::default_provider().install_default();
    });
    let mut builder = Client::builder()
        .redirect(Policy::none())
        .timeout(opts.timeout)
        .user_agent(opts.user_agent.clone());
    for (host, addr) in &opts.resolve {
        builder = builder.resolve(host, *addr);
    }
    builder.build().map_err(|e| WebError::Request(e.to_string()))
}

fn classify_error(e: reqwest::Error) -> WebError {
    let mut chain = Vec::new();
    let mut source = e.source();
    while let Some(s) = source {
        chain.push(s.to_string());
        source = s.source();
    }
    let detail = if chain.is_empty() { e.to_string() } else { chain.join(": ") };
    if e.is_timeout() {
        return WebError::Timeout(detail);
    }
    let lower = detail.to_lowercase();
    if lower.contains("dns") || lower.contains("lookup address") || lower.contains("name or service not known") {
        WebError::DnsFailure(detail)
    } else if e.is_connect() {
        WebError::Connect(detail)
    } else {
        WebError::Request(detail)
    }
}

fn resource_kind(source: ResourceSource) -> ResourceKind {
    match source {
        ResourceSource::Image | ResourceSource::Source | ResourceSource::InputImage | ResourceSource::Icon => {
            ResourceKind::Image
        }
        ResourceSource::Background => ResourceKind::Image,
        ResourceSource::Stylesheet | ResourceSource::CssUrl => ResourceKind::Style,
        ResourceSource::Script => ResourceKind::Script,
        ResourceSource::Frame => ResourceKind::Document,
    }
}

/// Fetches `site` without running scripts, following redirects by hand so
/// cookies set on every hop are seen. Cookies without a `Domain` attribute
/// belong to the host that set them. The page's loaded resources become
/// request records; the document itself is not one.
pub fn static_fetch(site: &str, opts: &FetchOptions, psl: &SuffixList) -> Result<CaptureSession, WebError> {
    let start = Url::parse(site.trim()).map_err(|e| WebError::BadSite(site.to_string(), e.to_string()))?;
    let site_host = url_host(&start).map_err(|e| WebError::SiteDomain { site: site.to_string(), source: e })?;
    let site_domain =
        psl.registrable_domain(&site_host).map_err(|e| WebError::SiteDomain { site: site.to_string(), source: e })?;
    let client = client(opts)?;
    let fetched_at = Utc::now();

    let mut cookies = Vec::new();
    let mut url = start;
    let mut hops = 0usize;
    let body = loop {
        let resp = client.get(url.clone()).send().map_err(classify_error)?;
        let hop_host = url_host(&url).unwrap_or_default();
        for header in resp.headers().get_all(SET_COOKIE) {
            let Ok(text) = header.to_str() else { continue };
            let Some(sc) = parse_set_cookie(text, fetched_at) else { continue };
            let domain = sc.domain.clone().unwrap_or_else(|| hop_host.clone());
            match classify_party(&domain, &site_domain, psl) {
                Ok(party) => cookies.push(CookieRecord {
                    name: sc.name,
                    cookie_domain: domain,
                    value_hash: sha256_hex(&sc.value),
                    expires: sc.expires,
                    party,
                }),
                Err(e) => log::warn!("{site}: ignoring cookie {:?} for {domain:?}: {e}", sc.name),
            }
        }
        let status = resp.status();
        if status.is_redirection() {
            let next = resp
                .headers()
                .get(LOCATION)
                .and_then(|l| l.to_str().ok())
                .and_then(|l| url.join(l).ok());
            if let Some(next) = next {
                if hops == opts.redirect_limit {
                    return Err(WebError::TooManyRedirects(opts.redirect_limit));
                }
                hops += 1;
                url = next;
                continue;
            }
        }
        if !status.is_success() {
            return Err(WebError::HttpError(status.as_u16()));
        }
        break resp.text().map_err(classify_error)?;
    };

    let extracted = extract_urls_with_base(&body, Some(&url));
    let mut requests = Vec::with_capacity(extracted.loaded.len());
    for loaded in extracted.loaded {
        let Ok(host) = url_host(&loaded.url) else { continue };
        match classify_party(&host, &site_domain, psl) {
            Ok(party) => requests.push(RequestRecord { host, party, resource_kind: resource_kind(loaded.source) }),
            Err(e) => log::debug!("{site}: skipping resource host {host:?}: {e}"),
        }
    }

    Ok(CaptureSession {
        site: site.trim().to_string(),
        site_domain,
        phase: Phase::PreConsent,
        fetched_at,
        cookies,
        requests,
        banner: Some(locate_with_defaults(&body)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteFailure {
    pub site: String,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub sessions: Vec<CaptureSession>,
    pub failures: Vec<SiteFailure>,
}

/// Fetches every site with at most `workers` in flight. Each site gets its
/// own client, so no cookie state is shared; failures are collected, never
/// fatal. Output keeps input order.
pub fn fetch_batch(sites: &[String], opts: &FetchOptions, psl: &SuffixList, workers: usize) -> BatchOutcome {
    let results = par::map_bounded(sites, workers.max(1), |site| (site.clone(), static_fetch(site, opts, psl)));
    let mut out = BatchOutcome::default();
    for (site, result) in results {
        match result {
            Ok(s) => out.sessions.push(s),
            Err(e) => {
                log::warn!("{site}: {e}");
                out.failures.push(SiteFailure { site, kind: e.kind().to_string(), detail: e.to_string() });
            }
        }
    }
    out
}
