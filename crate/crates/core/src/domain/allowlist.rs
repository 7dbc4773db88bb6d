use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::{DomainError, RegistrableDomain, SuffixList};

/// Registrable domains whose URLs are never counted as external.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allowlist {
    entries: BTreeSet<RegistrableDomain>,
}

impl Default for Allowlist {
    /// Only `w3.org`, which shows up in namespace and doctype URLs.
    fn default() -> Self {
        let mut entries = BTreeSet::new();
        entries.insert(RegistrableDomain::new_unchecked("w3.org".into()));
        Allowlist { entries }
    }
}

impl Allowlist {
    pub fn empty() -> Self {
        Allowlist { entries: BTreeSet::new() }
    }

    /// One host per line, `#` starts a comment. Each entry is reduced to its
    /// registrable domain, so `www.w3.org` and `w3.org` are the same entry.
    pub fn parse(text: &str, psl: &SuffixList) -> Result<Self, DomainError> {
        Self::parse_named(text, psl, "<allowlist>")
    }

    pub fn from_file(path: impl AsRef<Path>, psl: &SuffixList) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let text = read(path)?;
        Self::parse_named(&text, psl, &path.display().to_string())
    }

    fn parse_named(text: &str, psl: &SuffixList, name: &str) -> Result<Self, DomainError> {
        let mut entries = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let entry = strip_comment(line);
            if entry.is_empty() {
                continue;
            }
            let domain = psl.registrable_domain(entry).map_err(|e| DomainError::BadEntry {
                path: name.to_string(),
                line: idx + 1,
                source: Box::new(e),
            })?;
            entries.insert(domain);
        }
        Ok(Allowlist { entries })
    }

    pub fn insert(&mut self, domain: RegistrableDomain) {
        self.entries.insert(domain);
    }

    pub fn contains(&self, domain: &RegistrableDomain) -> bool {
        self.entries.contains(domain)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegistrableDomain> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Groups of registrable domains known to belong to the same organization
/// (`impots.gouv.fr` and `oups.gouv.fr`, say). Consulted only when building
/// reports; classification itself never merges domains.
#[derive(Debug, Clone, Default)]
pub struct SameEntity {
    group_of: HashMap<RegistrableDomain, usize>,
}

impl SameEntity {
    /// One group per line, members separated by whitespace or commas.
    pub fn parse(text: &str, psl: &SuffixList) -> Result<Self, DomainError> {
        Self::parse_named(text, psl, "<aliases>")
    }

    pub fn from_file(path: impl AsRef<Path>, psl: &SuffixList) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let text = read(path)?;
        Self::parse_named(&text, psl, &path.display().to_string())
    }

    fn parse_named(text: &str, psl: &SuffixList, name: &str) -> Result<Self, DomainError> {
        let mut aliases = SameEntity::default();
        let mut next_group = 0;
        for (idx, line) in text.lines().enumerate() {
            let body = strip_comment(line);
            let members: Vec<&str> = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if members.is_empty() {
                continue;
            }
            // A domain listed on several lines joins all of those groups.
            let mut group = next_group;
            let mut domains = Vec::with_capacity(members.len());
            for m in members {
                let d = psl.registrable_domain(m).map_err(|e| DomainError::BadEntry {
                    path: name.to_string(),
                    line: idx + 1,
                    source: Box::new(e),
                })?;
                if let Some(&g) = aliases.group_of.get(&d) {
                    group = group.min(g);
                }
                domains.push(d);
            }
            let merged: Vec<usize> = domains
                .iter()
                .filter_map(|d| aliases.group_of.get(d).copied())
                .collect();
            for g in aliases.group_of.values_mut() {
                if merged.contains(g) {
                    *g = group;
                }
            }
            for d in domains {
                aliases.group_of.insert(d, group);
            }
            next_group += 1;
        }
        Ok(aliases)
    }

    /// True when both domains are equal or listed in the same group.
    pub fn same(&self, a: &RegistrableDomain, b: &RegistrableDomain) -> bool {
        if a == b {
            return true;
        }
        match (self.group_of.get(a), self.group_of.get(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn read(path: &Path) -> Result<String, DomainError> {
    std::fs::read_to_string(path).map_err(|e| DomainError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
