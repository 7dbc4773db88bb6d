use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{is_dotted_identifier, read_file, TrackerDbError};
use crate::domain::normalize_host;

pub const BUNDLED_SIGNATURES: &str = include_str!("../../data/signatures.json");

/// Code-package and network patterns identifying one tracking SDK.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackerSignature {
    pub name: String,
    /// Package prefixes, matched at label boundaries.
    pub code_prefixes: Vec<String>,
    /// Hostnames; subdomains match too.
    pub network_hosts: Vec<String>,
    pub owner: String,
}

/// `code_signature` and `network_signature` come either as a list or, as in
/// the common published exports, a single `|`-joined regex-ish string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PatternField {
    List(Vec<String>),
    Joined(String),
}

impl PatternField {
    fn items(self) -> Vec<String> {
        let raw = match self {
            PatternField::List(v) => v,
            PatternField::Joined(s) => s.split('|').map(str::to_string).collect(),
        };
        raw.into_iter()
            .map(|s| s.trim().replace("\\.", "."))
            .filter(|s| !s.is_empty())
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct RawSignature {
    name: String,
    #[serde(default)]
    code_signature: Option<PatternField>,
    #[serde(default)]
    network_signature: Option<PatternField>,
    #[serde(default)]
    owner: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SignatureFile {
    List(Vec<RawSignature>),
    /// `{"trackers": {"<id>": {...}}}` export layout.
    Keyed { trackers: BTreeMap<String, RawSignature> },
}

impl TrackerSignature {
    fn from_raw(raw: RawSignature) -> Result<Self, TrackerDbError> {
        let name = raw.name.trim().to_string();
        let bad = |pattern: &str, reason: &str| TrackerDbError::BadSignature {
            name: name.clone(),
            pattern: pattern.to_string(),
            reason: reason.to_string(),
        };
        let mut code_prefixes = Vec::new();
        for p in raw.code_signature.map(PatternField::items).unwrap_or_default() {
            let prefix = p.trim_end_matches('.');
            if !is_dotted_identifier(prefix) {
                return Err(bad(&p, "not a dotted identifier"));
            }
            code_prefixes.push(prefix.to_string());
        }
        let mut network_hosts = Vec::new();
        for h in raw.network_signature.map(PatternField::items).unwrap_or_default() {
            let host = normalize_host(h.trim_start_matches('.')).map_err(|e| bad(&h, &e.to_string()))?;
            network_hosts.push(host);
        }
        if name.is_empty() {
            return Err(bad("", "empty tracker name"));
        }
        if code_prefixes.is_empty() && network_hosts.is_empty() {
            return Err(bad("", "no code or network patterns"));
        }
        Ok(TrackerSignature { name, code_prefixes, network_hosts, owner: raw.owner.unwrap_or_default() })
    }

    /// True when `class_name` lives in one of this tracker's packages.
    pub fn matches_class(&self, class_name: &str) -> bool {
        self.code_prefixes.iter().any(|p| {
            class_name == p
                || (class_name.len() > p.len()
                    && class_name.starts_with(p.as_str())
                    && class_name.as_bytes()[p.len()] == b'.')
        })
    }

    pub fn matches_host(&self, host: &str) -> bool {
        let host = host.trim_start_matches('.').to_ascii_lowercase();
        self.network_hosts.iter().any(|p| {
            host == *p
                || (host.len() > p.len()
                    && host.ends_with(p.as_str())
                    && host.as_bytes()[host.len() - p.len() - 1] == b'.')
        })
    }
}

/// Parses and validates a signature file. Tracker names must be unique.
pub fn load_signatures(json: &str) -> Result<Vec<TrackerSignature>, TrackerDbError> {
    let file: SignatureFile = serde_json::from_str(json)?;
    let raws: Vec<RawSignature> = match file {
        SignatureFile::List(v) => v,
        SignatureFile::Keyed { trackers } => trackers.into_values().collect(),
    };
    let mut names = HashSet::new();
    let mut out = Vec::with_capacity(raws.len());
    for raw in raws {
        let sig = TrackerSignature::from_raw(raw)?;
        if !names.insert(sig.name.clone()) {
            return Err(TrackerDbError::DuplicatePattern(sig.name));
        }
        out.push(sig);
    }
    Ok(out)
}

pub fn load_signatures_file(path: impl AsRef<Path>) -> Result<Vec<TrackerSignature>, TrackerDbError> {
    load_signatures(&read_file(path.as_ref())?)
}

pub fn bundled_signatures() -> Vec<TrackerSignature> {
    load_signatures(BUNDLED_SIGNATURES).expect("bundled signatures are valid")
}
