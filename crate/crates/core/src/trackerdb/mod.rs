//! Tracker signatures, domain blocklists and the entity attribution map.

mod blocklist;
mod entity;
mod signatures;

use std::path::Path;

use thiserror::Error;

pub use blocklist::{Category, DomainBlocklist};
pub use entity::{EntityMap, EntityRule, Pattern, BUNDLED_ENTITIES, FALLBACK_ENTITY};
pub use signatures::{bundled_signatures, load_signatures, load_signatures_file, TrackerSignature, BUNDLED_SIGNATURES};

#[derive(Debug, Error)]
pub enum TrackerDbError {
    #[error("duplicate pattern {0}")]
    DuplicatePattern(String),
    #[error("bad pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("tracker {name:?}: bad pattern {pattern:?}: {reason}")]
    BadSignature { name: String, pattern: String, reason: String },
    #[error("blocklist line {line}: {reason}")]
    BadBlocklistLine { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn read_file(path: &Path) -> Result<String, TrackerDbError> {
    std::fs::read_to_string(path).map_err(|e| TrackerDbError::Io { path: path.display().to_string(), source: e })
}

/// `com.google.firebase`-style name: non-empty labels of ASCII letters,
/// digits, `_` or `$`.
pub(crate) fn is_dotted_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.split('.').all(|label| {
            !label.is_empty() && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'$')
        })
}
