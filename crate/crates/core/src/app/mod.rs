//! Mobile app channel: public-service classification, interactive labeling,
//! tracker signature scanning and permission statistics.

mod label;
mod scan;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use label::{label_interactively, replay_log, AnswerLog, LogEntry, CRITERIA_PROMPTS};
pub use scan::{scan_app, scan_apps, scan_classes, AppDump};
pub use stats::{
    bundled_intrusive, is_red_flagged, parse_intrusive, permission_summary, tracker_identity_table, EntityShare,
    Frequency, PermissionSummary, RedFlagThresholds, BUNDLED_INTRUSIVE,
};

/// Public service iff at least two criteria hold and one of them is the
/// developer (c1) or the website (c4) criterion.
pub fn classify_public_service(c1: bool, c2: bool, c3: bool, c4: bool) -> bool {
    let count = [c1, c2, c3, c4].iter().filter(|&&c| c).count();
    count >= 2 && (c1 || c4)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Criteria {
    /// Developer is a public body.
    pub c1: Option<bool>,
    /// App name fits a public service.
    pub c2: Option<bool>,
    /// App id carries a public-service marker.
    pub c3: Option<bool>,
    /// App links to a public-service website.
    pub c4: Option<bool>,
}

impl Criteria {
    pub fn all(c1: bool, c2: bool, c3: bool, c4: bool) -> Self {
        Criteria { c1: Some(c1), c2: Some(c2), c3: Some(c3), c4: Some(c4) }
    }

    /// `None` until all four are answered.
    pub fn rule(&self) -> Option<bool> {
        Some(classify_public_service(self.c1?, self.c2?, self.c3?, self.c4?))
    }

    pub(crate) fn as_array(&self) -> [Option<bool>; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }

    pub(crate) fn set(&mut self, idx: usize, value: bool) {
        match idx {
            0 => self.c1 = Some(value),
            1 => self.c2 = Some(value),
            2 => self.c3 = Some(value),
            _ => self.c4 = Some(value),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    PublicService,
    NotPublicService,
    Skipped,
    #[default]
    Undecided,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::PublicService => "public-service",
            Decision::NotPublicService => "not-public-service",
            Decision::Skipped => "skipped",
            Decision::Undecided => "undecided",
        })
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "public-service" => Ok(Decision::PublicService),
            "not-public-service" => Ok(Decision::NotPublicService),
            "skipped" => Ok(Decision::Skipped),
            "undecided" => Ok(Decision::Undecided),
            other => Err(format!("unknown decision {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppRecord {
    pub app_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub developer: String,
    #[serde(default)]
    pub website: Option<String>,
    /// Search keyword the app was found under; labeling skips by group.
    #[serde(default)]
    pub keyword: Option<String>,
    /// App version the dump was taken from.
    #[serde(default)]
    pub version: Option<String>,
    #[serde(default)]
    pub criteria: Criteria,
    #[serde(default)]
    pub decision: Decision,
    #[serde(default)]
    pub permissions: Vec<String>,
    #[serde(default)]
    pub trackers: Vec<String>,
}

impl AppRecord {
    pub fn new(app_id: impl Into<String>) -> Self {
        AppRecord { app_id: app_id.into(), ..Default::default() }
    }

    /// Sets the decision; `PublicService` is refused unless the criteria
    /// satisfy the classification rule.
    pub fn decide(&mut self, decision: Decision) -> Result<(), AppError> {
        if decision == Decision::PublicService && self.criteria.rule() != Some(true) {
            return Err(AppError::RuleViolation(self.app_id.clone()));
        }
        self.decision = decision;
        Ok(())
    }

    /// Checks the record invariants.
    pub fn validate(&self) -> Result<(), AppError> {
        if self.decision == Decision::PublicService && self.criteria.rule() != Some(true) {
            return Err(AppError::RuleViolation(self.app_id.clone()));
        }
        Ok(())
    }

    /// Sorts and deduplicates permissions and trackers.
    pub fn normalize(&mut self) {
        for list in [&mut self.permissions, &mut self.trackers] {
            list.iter_mut().for_each(|s| *s = s.trim().to_string());
            list.retain(|s| !s.is_empty());
            list.sort();
            list.dedup();
        }
    }
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}: public-service decision contradicts the criteria")]
    RuleViolation(String),
    #[error("no apps to summarize")]
    EmptyInput,
    #[error("answer log line {line}: {reason}")]
    BadLog { line: usize, reason: String },
    #[error("malformed app dump: {0}")]
    Dump(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_examples() {
        assert!(classify_public_service(true, true, false, false));
        assert!(!classify_public_service(false, true, true, false));
        assert!(!classify_public_service(false, false, false, true));
        assert!(classify_public_service(false, false, true, true));
        assert!(!classify_public_service(true, false, false, false));
    }

    #[test]
    fn decide_guards_rule() {
        let mut app = AppRecord::new("fr.gouv.x");
        assert!(app.decide(Decision::PublicService).is_err());
        app.criteria = Criteria::all(false, true, true, false);
        assert!(app.decide(Decision::PublicService).is_err());
        app.criteria = Criteria::all(true, false, false, true);
        app.decide(Decision::PublicService).unwrap();
        app.validate().unwrap();
    }

    #[test]
    fn normalize_dedupes() {
        let mut app = AppRecord::new("a");
        app.permissions = vec!["B".into(), "A".into(), "B".into(), " ".into()];
        app.normalize();
        assert_eq!(app.permissions, ["A", "B"]);
    }

    #[test]
    fn decision_strings_round_trip() {
        for d in [Decision::PublicService, Decision::NotPublicService, Decision::Skipped, Decision::Undecided] {
            assert_eq!(d.to_string().parse::<Decision>().unwrap(), d);
            assert_eq!(serde_json::to_string(&d).unwrap(), format!("\"{d}\""));
        }
    }
}
