//! Host parsing, registrable-domain normalization, and the
//! internal / external / allowlisted classification shared by every channel.

mod allowlist;
mod psl;

use std::fmt;
use std::net::IpAddr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

pub use allowlist::{Allowlist, SameEntity};
pub use psl::{normalize_host, parse_rules, Rule, RuleKind, SuffixList, BUNDLED_LIST};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("empty host")]
    EmptyHost,
    #[error("unparseable host {0:?}")]
    UnparseableHost(String),
    #[error("{0:?} is itself a public suffix")]
    PublicSuffixOnly(String),
    #[error("no rules found in suffix list {0}")]
    EmptySuffixList(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    BadEntry {
        path: String,
        line: usize,
        #[source]
        source: Box<DomainError>,
    },
}

/// Normalized eTLD+1 identity, or a verbatim IP literal flagged as such.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegistrableDomain {
    value: String,
    ip: bool,
}

impl RegistrableDomain {
    /// Wraps an already-normalized registrable domain.
    pub(crate) fn new_unchecked(value: String) -> Self {
        RegistrableDomain { value, ip: false }
    }

    pub(crate) fn ip(addr: IpAddr) -> Self {
        RegistrableDomain { value: addr.to_string(), ip: true }
    }

    pub fn as_str(&self) -> &str {
        &self.value
    }

    /// True for IP-literal hosts, which have no registrable domain.
    pub fn is_ip(&self) -> bool {
        self.ip
    }

    /// Rebuilds a domain from its serialized form without consulting a
    /// suffix list.
    pub fn from_serialized(s: &str) -> Result<Self, DomainError> {
        let host = normalize_host(s)?;
        match host.parse::<IpAddr>() {
            Ok(addr) => Ok(Self::ip(addr)),
            Err(_) => Ok(Self::new_unchecked(host)),
        }
    }
}

impl fmt::Display for RegistrableDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

impl fmt::Debug for RegistrableDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.value)
    }
}

impl AsRef<str> for RegistrableDomain {
    fn as_ref(&self) -> &str {
        &self.value
    }
}

impl Serialize for RegistrableDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.value)
    }
}

impl<'de> Deserialize<'de> for RegistrableDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_serialized(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadKind {
    Loaded,
    LinkOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OriginKind {
    Internal,
    External,
    Allowlisted,
}

/// A URL seen in content, reduced to its host and registrable domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlFinding {
    pub host: String,
    pub domain: RegistrableDomain,
    pub load_kind: LoadKind,
    pub origin_kind: OriginKind,
}

impl UrlFinding {
    pub fn classify(
        url: &Url,
        load_kind: LoadKind,
        sender: &RegistrableDomain,
        allow: &Allowlist,
        psl: &SuffixList,
    ) -> Result<Self, DomainError> {
        let host = url_host(url)?;
        let domain = psl.registrable_domain(&host)?;
        let origin_kind = origin_of(&domain, sender, allow);
        Ok(UrlFinding { host, domain, load_kind, origin_kind })
    }
}

/// Host component of a URL, without IPv6 brackets.
pub fn url_host(url: &Url) -> Result<String, DomainError> {
    match url.host() {
        Some(url::Host::Domain(d)) => Ok(d.to_string()),
        Some(url::Host::Ipv4(a)) => Ok(a.to_string()),
        Some(url::Host::Ipv6(a)) => Ok(a.to_string()),
        None => Err(DomainError::UnparseableHost(url.as_str().to_string())),
    }
}

/// Internal beats allowlisted, which beats external.
pub fn origin_of(domain: &RegistrableDomain, sender: &RegistrableDomain, allow: &Allowlist) -> OriginKind {
    if domain == sender {
        OriginKind::Internal
    } else if !domain.is_ip() && allow.contains(domain) {
        OriginKind::Allowlisted
    } else {
        OriginKind::External
    }
}

/// Classifies an absolute URL against the sender's registrable domain.
pub fn classify_origin(
    url: &str,
    sender: &RegistrableDomain,
    allow: &Allowlist,
    psl: &SuffixList,
) -> Result<OriginKind, DomainError> {
    let parsed = Url::parse(url).map_err(|_| DomainError::UnparseableHost(url.to_string()))?;
    let host = url_host(&parsed)?;
    let domain = psl.registrable_domain(&host)?;
    Ok(origin_of(&domain, sender, allow))
}
