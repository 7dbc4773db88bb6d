//! Shared fixtures and brute-force oracles for the trackaudit test suites.

pub mod fixtures;
pub mod oracle;
pub mod properties;
pub mod server;
pub mod strategies;

use std::path::PathBuf;

/// Root of the checked-in fixture files.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
