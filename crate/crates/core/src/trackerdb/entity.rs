use std::collections::HashSet;
use std::path::Path;

use super::{read_file, TrackerDbError};
use crate::domain::{normalize_host, RegistrableDomain};

/// Entity returned when no rule matches.
pub const FALLBACK_ENTITY: &str = "Autres";

/// The bundled attribution file.
pub const BUNDLED_ENTITIES: &str = include_str!("../../data/entities.csv");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Matches the domain itself and every subdomain.
    Domain(String),
    /// `pkg:com.google` matches `com.google` and `com.google.*` package names.
    Package(String),
    /// `name:Google *` matches tracker names starting with `Google `;
    /// without a trailing `*` the match is exact. Case-insensitive.
    Name { text: String, prefix: bool },
}

impl Pattern {
    pub fn parse(raw: &str) -> Result<Self, TrackerDbError> {
        let raw = raw.trim();
        let bad = |why: &str| TrackerDbError::BadPattern { pattern: raw.to_string(), reason: why.to_string() };
        if let Some(rest) = raw.strip_prefix("name:") {
            let rest = rest.trim();
            let (text, prefix) = match rest.strip_suffix('*') {
                Some(t) => (t, true),
                None => (rest, false),
            };
            if text.trim().is_empty() && !prefix {
                return Err(bad("empty tracker name"));
            }
            if text.contains('*') {
                return Err(bad("'*' is only allowed at the end"));
            }
            return Ok(Pattern::Name { text: text.to_lowercase(), prefix });
        }
        if let Some(rest) = raw.strip_prefix("pkg:") {
            let pkg = rest.trim().trim_end_matches('.');
            if !super::is_dotted_identifier(pkg) {
                return Err(bad("not a dotted package name"));
            }
            return Ok(Pattern::Package(pkg.to_string()));
        }
        let host = raw.trim_start_matches("*.").trim_start_matches('.');
        let host = normalize_host(host).map_err(|e| bad(&e.to_string()))?;
        Ok(Pattern::Domain(host))
    }

    fn matches_domain(&self, host: &str) -> bool {
        match self {
            Pattern::Domain(p) => label_suffix(host, p),
            _ => false,
        }
    }
}

fn label_suffix(host: &str, pattern: &str) -> bool {
    host == pattern
        || (host.len() > pattern.len()
            && host.ends_with(pattern)
            && host.as_bytes()[host.len() - pattern.len() - 1] == b'.')
}

fn label_prefix(name: &str, prefix: &str) -> bool {
    name == prefix
        || (name.len() > prefix.len() && name.starts_with(prefix) && name.as_bytes()[prefix.len()] == b'.')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRule {
    pub pattern: Pattern,
    pub entity: String,
}

/// Ordered attribution rules; the first match wins and anything unmatched
/// belongs to [`FALLBACK_ENTITY`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMap {
    rules: Vec<EntityRule>,
    fallback: String,
}

impl Default for EntityMap {
    fn default() -> Self {
        EntityMap { rules: Vec::new(), fallback: FALLBACK_ENTITY.to_string() }
    }
}

impl EntityMap {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_ENTITIES).expect("bundled entity map is valid")
    }

    pub fn from_rules(rules: Vec<EntityRule>) -> Result<Self, TrackerDbError> {
        let mut seen = HashSet::new();
        for r in &rules {
            if !seen.insert(r.pattern.clone()) {
                return Err(TrackerDbError::DuplicatePattern(format!("{:?}", r.pattern)));
            }
        }
        Ok(EntityMap { rules, fallback: FALLBACK_ENTITY.to_string() })
    }

    /// CSV with `pattern,entity` rows. A header row with exactly those names
    /// is skipped; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self, TrackerDbError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rules = Vec::new();
        for (idx, row) in reader.records().enumerate() {
            let row = row?;
            if row.iter().all(str::is_empty) {
                continue;
            }
            if idx == 0 && row.get(0) == Some("pattern") && row.get(1) == Some("entity") {
                continue;
            }
            let (Some(pattern), Some(entity)) = (row.get(0), row.get(1)) else {
                return Err(TrackerDbError::BadPattern {
                    pattern: row.iter().collect::<Vec<_>>().join(","),
                    reason: "expected pattern,entity".into(),
                });
            };
            if entity.is_empty() {
                return Err(TrackerDbError::BadPattern { pattern: pattern.into(), reason: "empty entity".into() });
            }
            rules.push(EntityRule { pattern: Pattern::parse(pattern)?, entity: entity.to_string() });
        }
        Self::from_rules(rules)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TrackerDbError> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn rules(&self) -> &[EntityRule] {
        &self.rules
    }

    pub fn fallback(&self) -> &str {
        &self.fallback
    }

    /// Owner of a registrable domain (or any host).
    pub fn attribute(&self, domain: &RegistrableDomain) -> &str {
        self.attribute_host(domain.as_str())
    }

    pub fn attribute_host(&self, host: &str) -> &str {
        let host = host.trim_start_matches('.').to_ascii_lowercase();
        self.first(|p| p.matches_domain(&host))
    }

    /// Owner of a tracker, looked up by its display name.
    pub fn attribute_tracker(&self, name: &str) -> &str {
        let name = name.trim().to_lowercase();
        self.first(|p| match p {
            Pattern::Name { text, prefix: true } => name.starts_with(text.as_str()),
            Pattern::Name { text, prefix: false } => name == *text,
            _ => false,
        })
    }

    /// Owner of a Java package or class name.
    pub fn attribute_package(&self, class_name: &str) -> &str {
        self.first(|p| match p {
            Pattern::Package(prefix) => label_prefix(class_name, prefix),
            _ => false,
        })
    }

    fn first(&self, pred: impl Fn(&Pattern) -> bool) -> &str {
        self.rules
            .iter()
            .find(|r| pred(&r.pattern))
            .map(|r| r.entity.as_str())
            .unwrap_or(&self.fallback)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SuffixList;

    #[test]
    fn reference_attributions() {
        let map = EntityMap::parse(
            "pattern,entity\ngoogle.com,Google\ngoogleapis.com,Google\ndoubleclick.net,Google\nfacebook.com,Facebook\nxiti.com,Xiti\n",
        )
        .unwrap();
        let psl = SuffixList::bundled();
        let d = |h: &str| psl.registrable_domain(h).unwrap();
        assert_eq!(map.attribute(&d("fonts.googleapis.com")), "Google");
        assert_eq!(map.attribute(&d("pubads.g.doubleclick.net")), "Google");
        assert_eq!(map.attribute(&d("logc279.xiti.com")), "Xiti");
        assert_eq!(map.attribute(&d("www.facebook.com")), "Facebook");
        assert_eq!(map.attribute(&d("unlisted.example")), "Autres");
    }

    #[test]
    fn suffix_match_respects_labels() {
        let map = EntityMap::parse("google.com,Google\n").unwrap();
        assert_eq!(map.attribute_host("notgoogle.com"), "Autres");
        assert_eq!(map.attribute_host(".google.com"), "Google");
    }

    #[test]
    fn empty_file_only_fallback() {
        let map = EntityMap::parse("").unwrap();
        assert!(map.rules().is_empty());
        assert_eq!(map.attribute_host("google.com"), "Autres");
    }

    #[test]
    fn duplicates_rejected() {
        let err = EntityMap::parse("google.com,Google\nGOOGLE.com,Alphabet\n").unwrap_err();
        assert!(matches!(err, TrackerDbError::DuplicatePattern(_)));
    }

    #[test]
    fn bad_patterns_rejected() {
        for bad in ["pkg:com..google,X", "name:Go*gle,X", "http://x.com/,X", "justone\n"] {
            assert!(EntityMap::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn first_match_wins() {
        let map = EntityMap::parse("name:Google Tag Manager,GTM\nname:Google *,Google\n").unwrap();
        assert_eq!(map.attribute_tracker("Google Tag Manager"), "GTM");
        assert_eq!(map.attribute_tracker("google firebase analytics"), "Google");
        assert_eq!(map.attribute_tracker("OneSignal"), "Autres");
    }

    #[test]
    fn package_rules() {
        let map = EntityMap::parse("pkg:com.google,Google\n").unwrap();
        assert_eq!(map.attribute_package("com.google.firebase.X"), "Google");
        assert_eq!(map.attribute_package("com.googlex.Y"), "Autres");
    }

    #[test]
    fn bundled_map_is_valid() {
        let map = EntityMap::bundled();
        assert_eq!(map.attribute_host("doubleclick.net"), "Google");
        assert_eq!(map.attribute_host("xiti.com"), "Xiti");
        assert_eq!(map.attribute_host("iroquois.fr"), "Iroquois");
        assert_eq!(map.attribute_tracker("Facebook Login"), "Facebook");
        assert_eq!(map.attribute_tracker("Microsoft Visual Studio App Center Crashes"), "Microsoft");
    }
}
