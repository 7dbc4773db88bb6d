use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{read_file, TrackerDbError};
use crate::domain::{RegistrableDomain, SuffixList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Analytics,
    Advertising,
    Social,
    Other,
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytics" => Ok(Category::Analytics),
            "advertising" | "ads" => Ok(Category::Advertising),
            "social" => Ok(Category::Social),
            "other" | "" => Ok(Category::Other),
            other => Err(format!("unknown category {other:?}")),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Analytics => "analytics",
            Category::Advertising => "advertising",
            Category::Social => "social",
            Category::Other => "other",
        })
    }
}

/// Known tracking domains with a coarse category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainBlocklist {
    entries: BTreeMap<RegistrableDomain, Category>,
}

impl DomainBlocklist {
    /// `domain[,category]` per line; `#` comments. Hosts are reduced to their
    /// registrable domain. A later line overrides an earlier category.
    pub fn parse(text: &str, psl: &SuffixList) -> Result<Self, TrackerDbError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (host, cat) = match body.split_once(',') {
                Some((h, c)) => (h.trim(), c.trim()),
                None => (body, ""),
            };
            let bad = |reason: String| TrackerDbError::BadBlocklistLine { line: idx + 1, reason };
            let domain = psl.registrable_domain(host).map_err(|e| bad(e.to_string()))?;
            let category = cat.parse::<Category>().map_err(bad)?;
            entries.insert(domain, category);
        }
        Ok(DomainBlocklist { entries })
    }

    pub fn from_file(path: impl AsRef<Path>, psl: &SuffixList) -> Result<Self, TrackerDbError> {
        Self::parse(&read_file(path.as_ref())?, psl)
    }

    pub fn category(&self, domain: &RegistrableDomain) -> Option<Category> {
        self.entries.get(domain).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
