//! Public suffix ruleset and registrable-domain (eTLD+1) extraction.
//!
//! Rules are read from the standard `public_suffix_list.dat` text format:
//! `//` comment lines, plain rules, wildcard rules (`*.ck`) and exception
//! rules (`!www.ck`). Unicode rules are stored in their punycode form so
//! that every lookup happens on ASCII labels.
//!
//! By default only the ICANN section is used. The private section lists
//! hosting platforms (`googleapis.com`, `blogspot.com`, ...) whose customers
//! get their own registrable domain; for attributing trackers to their
//! operator that split is unwanted, so it is opt-in.

use std::collections::HashSet;
use std::net::IpAddr;
use std::path::Path;

use super::{DomainError, RegistrableDomain};

/// The bundled copy of the public suffix list.
pub const BUNDLED_LIST: &str = include_str!("../../data/public_suffix_list.dat");

/// A parsed public suffix ruleset. Read-only after construction.
#[derive(Debug, Clone, Default)]
pub struct SuffixList {
    normal: HashSet<String>,
    /// Parents of wildcard rules: `*.kobe.jp` is stored as `kobe.jp`.
    wildcard: HashSet<String>,
    /// Exception rules without the leading `!`.
    exception: HashSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Normal,
    Wildcard,
    Exception,
}

/// One rule as written in the list, normalized to lowercase ASCII labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub kind: RuleKind,
    /// Labels of the rule without `*.` or `!` markers.
    pub name: String,
    /// Rule comes from the list's private-domains section.
    pub private: bool,
}

impl SuffixList {
    /// Parses the bundled list, ICANN section only.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LIST)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        Self::from_file_with(path, false)
    }

    pub fn from_file_with(path: impl AsRef<Path>, include_private: bool) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DomainError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let list = Self::parse_with(&text, include_private);
        if list.is_empty() {
            return Err(DomainError::EmptySuffixList(path.display().to_string()));
        }
        Ok(list)
    }

    /// Parses list text, ICANN section only. Lines that do not form a rule
    /// are ignored, as the format requires.
    pub fn parse(text: &str) -> Self {
        Self::parse_with(text, false)
    }

    pub fn parse_with(text: &str, include_private: bool) -> Self {
        let mut list = SuffixList::default();
        for rule in parse_rules(text).into_iter().filter(|r| include_private || !r.private) {
            match rule.kind {
                RuleKind::Normal => list.normal.insert(rule.name),
                RuleKind::Wildcard => list.wildcard.insert(rule.name),
                RuleKind::Exception => list.exception.insert(rule.name),
            };
        }
        list
    }

    pub fn len(&self) -> usize {
        self.normal.len() + self.wildcard.len() + self.exception.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of labels in the public suffix of `labels` (a normalized host
    /// split on dots). Falls back to the implicit `*` rule, so the answer is
    /// always at least 1.
    fn suffix_len(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let mut best = 1;
        for k in 1..=n {
            let candidate = labels[n - k..].join(".");
            if self.exception.contains(&candidate) {
                // An exception always prevails; its suffix drops the leftmost label.
                return k - 1;
            }
            if self.normal.contains(&candidate) {
                best = best.max(k);
            }
            if k >= 2 && self.wildcard.contains(&labels[n - k + 1..].join(".")) {
                best = best.max(k);
            }
        }
        best
    }

    /// Public suffix of an already-normalized ASCII host.
    pub fn public_suffix<'h>(&self, host: &'h str) -> &'h str {
        let labels: Vec<&str> = host.split('.').collect();
        let k = self.suffix_len(&labels);
        tail(host, &labels, k)
    }

    /// Returns the eTLD+1 of `host`.
    ///
    /// Hosts are case-folded, stripped of one trailing dot and converted to
    /// punycode before matching. IP literals come back verbatim, flagged as
    /// non-registrable.
    pub fn registrable_domain(&self, host: &str) -> Result<RegistrableDomain, DomainError> {
        let host = normalize_host(host)?;
        if let Some(ip) = parse_ip(&host) {
            return Ok(RegistrableDomain::ip(ip));
        }
        let labels: Vec<&str> = host.split('.').collect();
        let k = self.suffix_len(&labels);
        if labels.len() <= k {
            return Err(DomainError::PublicSuffixOnly(host));
        }
        Ok(RegistrableDomain::new_unchecked(tail(&host, &labels, k + 1).to_string()))
    }
}

fn tail<'h>(host: &'h str, labels: &[&str], k: usize) -> &'h str {
    let skip: usize = labels[..labels.len() - k].iter().map(|l| l.len() + 1).sum();
    &host[skip..]
}

/// Parses every rule line of a list file. Rules after a
/// `===BEGIN PRIVATE DOMAINS===` marker are flagged private until the
/// matching end marker.
pub fn parse_rules(text: &str) -> Vec<Rule> {
    let mut rules = Vec::new();
    let mut private = false;
    for line in text.lines() {
        if line.trim_start().starts_with("//") {
            if line.contains("===BEGIN PRIVATE DOMAINS===") {
                private = true;
            } else if line.contains("===END PRIVATE DOMAINS===") {
                private = false;
            }
            continue;
        }
        // A rule ends at the first whitespace.
        let Some(token) = line.split_whitespace().next() else {
            continue;
        };
        let (kind, body) = if let Some(rest) = token.strip_prefix('!') {
            (RuleKind::Exception, rest)
        } else if let Some(rest) = token.strip_prefix("*.") {
            (RuleKind::Wildcard, rest)
        } else {
            (RuleKind::Normal, token)
        };
        let Ok(name) = idna::domain_to_ascii(body) else {
            log::warn!("skipping unparseable suffix rule {token:?}");
            continue;
        };
        if name.is_empty() {
            continue;
        }
        rules.push(Rule { kind, name, private });
    }
    rules
}

fn parse_ip(host: &str) -> Option<IpAddr> {
    let inner = host
        .strip_prefix('[')
        .and_then(|h| h.strip_suffix(']'))
        .unwrap_or(host);
    inner.parse().ok()
}

/// Lowercases, strips one trailing dot and punycode-encodes a hostname,
/// rejecting anything that carries a scheme, path, port or userinfo.
pub fn normalize_host(host: &str) -> Result<String, DomainError> {
    let trimmed = host.trim();
    if trimmed.is_empty() {
        return Err(DomainError::EmptyHost);
    }
    let unparseable = || DomainError::UnparseableHost(host.to_string());
    if let Some(ip) = parse_ip(trimmed) {
        return Ok(ip.to_string());
    }
    let stripped = trimmed.strip_suffix('.').unwrap_or(trimmed);
    if stripped.is_empty()
        || stripped
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ':' | '/' | '@' | '?' | '#' | '\\' | '[' | ']'))
    {
        return Err(unparseable());
    }
    let ascii = idna::domain_to_ascii(stripped).map_err(|_| unparseable())?;
    if ascii.is_empty() || ascii.split('.').any(str::is_empty) {
        return Err(unparseable());
    }
    Ok(ascii)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuffixList {
        SuffixList::parse(
            "// comment\nfr\ngouv.fr\ncom\n*.ck\n!www.ck\njp\n*.kobe.jp\n!city.kobe.jp\n\n",
        )
    }

    #[test]
    fn parses_rule_kinds() {
        let rules = parse_rules("// x\n*.ck\n!www.ck\nfr  trailing text\n");
        assert_eq!(
            rules,
            vec![
                Rule { kind: RuleKind::Wildcard, name: "ck".into(), private: false },
                Rule { kind: RuleKind::Exception, name: "www.ck".into(), private: false },
                Rule { kind: RuleKind::Normal, name: "fr".into(), private: false },
            ]
        );
    }

    #[test]
    fn basic_matching() {
        let psl = small();
        let rd = |h: &str| psl.registrable_domain(h).map(|d| d.as_str().to_string());
        assert_eq!(rd("example.com").unwrap(), "example.com");
        assert_eq!(rd("oups.gouv.fr").unwrap(), "oups.gouv.fr");
        assert_eq!(rd("www.impots.gouv.fr").unwrap(), "impots.gouv.fr");
        assert_eq!(rd("a.b.test.ck").unwrap(), "b.test.ck");
        assert_eq!(rd("www.www.ck").unwrap(), "www.ck");
        assert_eq!(rd("www.city.kobe.jp").unwrap(), "city.kobe.jp");
        assert!(matches!(rd("gouv.fr"), Err(DomainError::PublicSuffixOnly(_))));
        assert!(matches!(rd("test.ck"), Err(DomainError::PublicSuffixOnly(_))));
    }

    #[test]
    fn unlisted_tld_uses_implicit_star() {
        let psl = small();
        assert_eq!(psl.registrable_domain("a.b.site.test").unwrap().as_str(), "site.test");
        assert!(psl.registrable_domain("localhost").is_err());
    }

    #[test]
    fn normalization() {
        let psl = small();
        assert_eq!(psl.registrable_domain("WwW.Example.COM.").unwrap().as_str(), "example.com");
        assert!(matches!(psl.registrable_domain("  "), Err(DomainError::EmptyHost)));
        for bad in ["mailto:x@y.fr", "a..b.fr", "host:80", "user@host.fr", "http://x.fr/", ".example.com"] {
            assert!(
                matches!(psl.registrable_domain(bad), Err(DomainError::UnparseableHost(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn ip_hosts_are_verbatim() {
        let psl = small();
        let d = psl.registrable_domain("127.0.0.1").unwrap();
        assert!(d.is_ip());
        assert_eq!(d.as_str(), "127.0.0.1");
        let d = psl.registrable_domain("[::1]").unwrap();
        assert!(d.is_ip());
        assert_eq!(d.as_str(), "::1");
    }

    #[test]
    fn public_suffix_of_host() {
        let psl = small();
        assert_eq!(psl.public_suffix("stats.info.ameli.fr"), "fr");
        assert_eq!(psl.public_suffix("oups.gouv.fr"), "gouv.fr");
    }

    #[test]
    fn bundled_list_loads() {
        let psl = SuffixList::bundled();
        assert!(psl.len() > 6000);
        assert_eq!(psl.registrable_domain("stats.info.ameli.fr").unwrap().as_str(), "ameli.fr");
    }

    #[test]
    fn private_section_is_opt_in() {
        let text = "com\n// ===BEGIN PRIVATE DOMAINS===\ngoogleapis.com\n// ===END PRIVATE DOMAINS===\nfr\n";
        let rules = parse_rules(text);
        assert_eq!(rules.iter().filter(|r| r.private).count(), 1);
        assert!(!rules[2].private);
        let icann = SuffixList::parse(text);
        assert_eq!(icann.registrable_domain("fonts.googleapis.com").unwrap().as_str(), "googleapis.com");
        let all = SuffixList::parse_with(text, true);
        assert_eq!(all.registrable_domain("fonts.googleapis.com").unwrap().as_str(), "fonts.googleapis.com");
        let bundled_all = SuffixList::parse_with(BUNDLED_LIST, true);
        assert!(bundled_all.len() > SuffixList::bundled().len());
    }
}
