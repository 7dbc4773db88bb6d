use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AppError, AppRecord};
use crate::par;
use crate::trackerdb::TrackerSignature;

/// Pre-extracted app contents, as produced by any static-analysis tool.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppDump {
    pub app_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub developer: String,
    #[serde(default)]
    pub website: Option<String>,
    #[serde(default)]
    pub version: Option<String>,
    #[serde(default)]
    pub keyword: Option<String>,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub permissions: Vec<String>,
}

impl AppDump {
    pub fn from_json(json: &str) -> Result<Self, AppError> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Accepts `com.x.Y`, `com/x/Y` and the JVM descriptor form `Lcom/x/Y;`.
fn dotted(class_name: &str) -> String {
    let s = class_name.trim();
    let s = match s.strip_prefix('L').and_then(|r| r.strip_suffix(';')) {
        Some(inner) => inner,
        None => s,
    };
    s.replace('/', ".")
}

/// Names of the trackers with a code prefix matching some class at a label
/// boundary. Sorted and deduplicated.
pub fn scan_classes<S: AsRef<str>>(class_names: &[S], sigs: &[TrackerSignature]) -> Vec<String> {
    let classes: Vec<String> = class_names.iter().map(|c| dotted(c.as_ref())).collect();
    let found: BTreeSet<&str> = sigs
        .iter()
        .filter(|sig| classes.iter().any(|c| sig.matches_class(c)))
        .map(|sig| sig.name.as_str())
        .collect();
    found.into_iter().map(str::to_string).collect()
}

/// Turns a dump into a record with its trackers filled in. The decision is
/// left undecided; labeling is a separate step.
pub fn scan_app(dump: &AppDump, sigs: &[TrackerSignature]) -> AppRecord {
    let mut record = AppRecord {
        app_id: dump.app_id.clone(),
        title: dump.title.clone(),
        developer: dump.developer.clone(),
        website: dump.website.clone(),
        keyword: dump.keyword.clone(),
        version: dump.version.clone(),
        permissions: dump.permissions.clone(),
        trackers: scan_classes(&dump.classes, sigs),
        ..Default::default()
    };
    record.normalize();
    record
}

/// Scans every dump, in parallel when enabled. Output keeps input order.
pub fn scan_apps(dumps: &[AppDump], sigs: &[TrackerSignature]) -> Vec<AppRecord> {
    par::map(dumps, |d| scan_app(d, sigs))
}
