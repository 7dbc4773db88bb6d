//! Slow, obviously-correct reference implementations.

use std::collections::{BTreeMap, BTreeSet};

use trackaudit_core::domain::{normalize_host, parse_rules, Rule, RuleKind, BUNDLED_LIST};

use crate::fixtures_dir;

/// Public suffix matching by scanning every rule for every query.
pub struct BruteForcePsl {
    rules: Vec<Rule>,
}

fn ends_with_labels(host: &[&str], suffix: &[&str]) -> bool {
    host.len() >= suffix.len() && host[host.len() - suffix.len()..] == *suffix
}

impl BruteForcePsl {
    /// ICANN-section rules of `text`.
    pub fn icann(text: &str) -> Self {
        BruteForcePsl { rules: parse_rules(text).into_iter().filter(|r| !r.private).collect() }
    }

    /// Every rule of `text`, private section included.
    pub fn full(text: &str) -> Self {
        BruteForcePsl { rules: parse_rules(text) }
    }

    pub fn bundled() -> Self {
        Self::icann(BUNDLED_LIST)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Registrable domain of `host`, or `None` when the host is a public
    /// suffix or unparseable. IP literals are returned as-is.
    pub fn registrable_domain(&self, host: &str) -> Option<String> {
        let host = normalize_host(host).ok()?;
        if host.parse::<std::net::IpAddr>().is_ok() {
            return Some(host);
        }
        let labels: Vec<&str> = host.split('.').collect();
        let mut exception: Option<usize> = None;
        let mut longest = 1usize;
        for rule in &self.rules {
            let rl: Vec<&str> = rule.name.split('.').collect();
            match rule.kind {
                RuleKind::Exception if ends_with_labels(&labels, &rl) => {
                    exception = Some(exception.map_or(rl.len() - 1, |e: usize| e.max(rl.len() - 1)));
                }
                RuleKind::Normal if ends_with_labels(&labels, &rl) => longest = longest.max(rl.len()),
                RuleKind::Wildcard if labels.len() > rl.len() && ends_with_labels(&labels, &rl) => {
                    longest = longest.max(rl.len() + 1)
                }
                _ => {}
            }
        }
        let suffix = exception.unwrap_or(longest);
        if labels.len() <= suffix {
            return None;
        }
        Some(labels[labels.len() - suffix - 1..].join("."))
    }
}

/// The community test vectors: `(input, expected registrable domain)`.
/// They assume the full list, private section included. Expected values
/// are converted to their ASCII form, which is what the matcher returns.
pub fn psl_vectors() -> Vec<(String, Option<String>)> {
    let text = std::fs::read_to_string(fixtures_dir().join("psl_tests.txt")).expect("psl_tests.txt");
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            let input = it.next()?;
            let expected = it.next()?;
            if input == "null" {
                return None;
            }
            let expected = (expected != "null").then(|| normalize_host(expected).expect("vector host"));
            Some((input.to_string(), expected))
        })
        .collect()
}

/// Tracker names whose prefix list matches some class at a dot boundary,
/// by checking every (class, prefix) pair.
pub fn naive_scan(classes: &[String], sigs: &[(String, Vec<String>)]) -> Vec<String> {
    let mut found = BTreeSet::new();
    for class in classes {
        let class = class.replace('/', ".");
        for (name, prefixes) in sigs {
            for p in prefixes {
                if class == *p || class.starts_with(&format!("{p}.")) {
                    found.insert(name.clone());
                }
            }
        }
    }
    found.into_iter().collect()
}

/// Flat recount of `(key, value)` pairs, one count per distinct pair.
pub fn recount<K: Ord + Clone, V: Ord>(pairs: impl IntoIterator<Item = (K, V)>) -> BTreeMap<K, u64> {
    let distinct: BTreeSet<(K, V)> = pairs.into_iter().collect();
    let mut out = BTreeMap::new();
    for (k, _) in distinct {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}
