use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AppError, AppRecord};
use crate::trackerdb::EntityMap;

pub const BUNDLED_INTRUSIVE: &str = include_str!("../../data/intrusive_permissions.txt");

/// One permission per line, `#` comments. Bare names get the
/// `android.permission.` prefix.
pub fn parse_intrusive(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| if l.contains('.') { l.to_string() } else { format!("android.permission.{l}") })
        .collect()
}

pub fn bundled_intrusive() -> BTreeSet<String> {
    parse_intrusive(BUNDLED_INTRUSIVE)
}

/// Round-half-up of `num / den` to an integer.
fn round_ratio(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// `count` out of `of`, kept exact; [`Frequency::percent`] rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    pub name: String,
    pub count: u64,
    pub of: u64,
}

impl Frequency {
    pub fn percent(&self) -> u64 {
        if self.of == 0 {
            0
        } else {
            round_ratio(100 * self.count, self.of)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermissionSummary {
    pub app_count: u64,
    pub total_permissions: u64,
    pub total_trackers: u64,
    /// Rounded to two decimals.
    pub mean_permissions: f64,
    pub mean_trackers: f64,
    /// Most requested first, then by name.
    pub permissions: Vec<Frequency>,
    /// Every intrusive permission, including unrequested ones.
    pub intrusive: Vec<Frequency>,
}

fn mean_2dp(total: u64, n: u64) -> f64 {
    round_ratio(100 * total, n) as f64 / 100.0
}

/// Means and frequencies over `apps`. Callers pick the population, usually
/// the apps labeled public service.
pub fn permission_summary(apps: &[AppRecord], intrusive: &BTreeSet<String>) -> Result<PermissionSummary, AppError> {
    if apps.is_empty() {
        return Err(AppError::EmptyInput);
    }
    let n = apps.len() as u64;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let (mut total_permissions, mut total_trackers) = (0u64, 0u64);
    for app in apps {
        let perms: BTreeSet<&str> = app.permissions.iter().map(String::as_str).collect();
        let trackers: BTreeSet<&str> = app.trackers.iter().map(String::as_str).collect();
        total_permissions += perms.len() as u64;
        total_trackers += trackers.len() as u64;
        for p in perms {
            *counts.entry(p).or_default() += 1;
        }
    }
    let mut permissions: Vec<Frequency> =
        counts.iter().map(|(p, c)| Frequency { name: p.to_string(), count: *c, of: n }).collect();
    permissions.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    let mut intrusive_freq: Vec<Frequency> = intrusive
        .iter()
        .map(|p| Frequency { name: p.clone(), count: counts.get(p.as_str()).copied().unwrap_or(0), of: n })
        .collect();
    intrusive_freq.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    Ok(PermissionSummary {
        app_count: n,
        total_permissions,
        total_trackers,
        mean_permissions: mean_2dp(total_permissions, n),
        mean_trackers: mean_2dp(total_trackers, n),
        permissions,
        intrusive: intrusive_freq,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityShare {
    pub entity: String,
    pub count: u64,
    pub of: u64,
    pub percent: u64,
}

/// Share of tracker occurrences, one per (app, tracker) pair, by owning
/// entity. Largest share first, then by name.
pub fn tracker_identity_table(apps: &[AppRecord], map: &EntityMap) -> Result<Vec<EntityShare>, AppError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for app in apps {
        let trackers: BTreeSet<&str> = app.trackers.iter().map(String::as_str).collect();
        for t in trackers {
            *counts.entry(map.attribute_tracker(t).to_string()).or_default() += 1;
        }
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(AppError::EmptyInput);
    }
    let mut rows: Vec<EntityShare> = counts
        .into_iter()
        .map(|(entity, count)| EntityShare { entity, count, of: total, percent: round_ratio(100 * count, total) })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.entity.cmp(&b.entity)));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedFlagThresholds {
    pub max_permissions: usize,
    pub max_trackers: usize,
}

impl Default for RedFlagThresholds {
    fn default() -> Self {
        RedFlagThresholds { max_permissions: 10, max_trackers: 5 }
    }
}

pub fn is_red_flagged(app: &AppRecord, t: &RedFlagThresholds) -> bool {
    app.permissions.len() > t.max_permissions || app.trackers.len() > t.max_trackers
}
