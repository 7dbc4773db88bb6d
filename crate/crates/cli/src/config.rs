//! Run configuration: an optional `key=value` file, overridden by flags,
//! then every referenced file loaded up front.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use trackaudit_core::app::{bundled_intrusive, parse_intrusive};
use trackaudit_core::domain::{Allowlist, SameEntity, SuffixList};
use trackaudit_core::trackerdb::{bundled_signatures, load_signatures_file, EntityMap, TrackerSignature};

use crate::CliError;

pub const CONFIG_ENV: &str = "TRACKAUDIT_CONFIG";

const KEYS: [&str; 10] =
    ["psl", "psl_private", "allowlist", "aliases", "signatures", "entities", "intrusive", "parallel", "timeout", "redirects"];

/// Values from flags; `None` defers to the config file, then defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub psl: Option<PathBuf>,
    pub psl_private: bool,
    pub allowlist: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub signatures: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub intrusive: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub timeout: Option<u64>,
    pub redirects: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub psl: Option<PathBuf>,
    pub psl_private: bool,
    pub allowlist: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub signatures: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub intrusive: Option<PathBuf>,
    pub parallel: usize,
    pub timeout: Duration,
    pub redirects: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            psl: None,
            psl_private: false,
            allowlist: None,
            aliases: None,
            signatures: None,
            entities: None,
            intrusive: None,
            parallel: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            timeout: Duration::from_secs(30),
            redirects: 5,
        }
    }
}

/// Parses `key=value` lines; `#` starts a comment. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", idx + 1))?;
        let k = k.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("line {}: unknown key {k:?}", idx + 1));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("{key}: {v:?} is not a number")))
}

impl RunConfig {
    /// Merges defaults, the config file (paths relative to its directory)
    /// and flag overrides, in increasing priority.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
            let map = parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let rel = |v: &str| base.join(v);
            for (k, v) in &map {
                match k.as_str() {
                    "psl" => cfg.psl = Some(rel(v)),
                    "psl_private" => cfg.psl_private = matches!(v.as_str(), "1" | "true" | "yes"),
                    "allowlist" => cfg.allowlist = Some(rel(v)),
                    "aliases" => cfg.aliases = Some(rel(v)),
                    "signatures" => cfg.signatures = Some(rel(v)),
                    "entities" => cfg.entities = Some(rel(v)),
                    "intrusive" => cfg.intrusive = Some(rel(v)),
                    "parallel" => cfg.parallel = number(k, v)?,
                    "timeout" => cfg.timeout = Duration::from_secs(number(k, v)?),
                    "redirects" => cfg.redirects = number(k, v)?,
                    _ => unreachable!("keys validated by parse_config"),
                }
            }
        }
        let f = flags.clone();
        cfg.psl = f.psl.or(cfg.psl);
        cfg.psl_private |= f.psl_private;
        cfg.allowlist = f.allowlist.or(cfg.allowlist);
        cfg.aliases = f.aliases.or(cfg.aliases);
        cfg.signatures = f.signatures.or(cfg.signatures);
        cfg.entities = f.entities.or(cfg.entities);
        cfg.intrusive = f.intrusive.or(cfg.intrusive);
        cfg.parallel = f.parallel.unwrap_or(cfg.parallel).max(1);
        cfg.timeout = f.timeout.map(Duration::from_secs).unwrap_or(cfg.timeout);
        cfg.redirects = f.redirects.unwrap_or(cfg.redirects);
        Ok(cfg)
    }

    /// Loads every referenced file. Any failure aborts before work starts.
    pub fn load(&self) -> Result<Resources, CliError> {
        let cfg_err = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        let psl = match &self.psl {
            Some(p) => SuffixList::from_file_with(p, self.psl_private).map_err(|e| cfg_err(&e))?,
            None if self.psl_private => SuffixList::parse_with(trackaudit_core::domain::BUNDLED_LIST, true),
            None => SuffixList::bundled(),
        };
        let allowlist = match &self.allowlist {
            Some(p) => Allowlist::from_file(p, &psl).map_err(|e| cfg_err(&e))?,
            None => Allowlist::default(),
        };
        let aliases = match &self.aliases {
            Some(p) => SameEntity::from_file(p, &psl).map_err(|e| cfg_err(&e))?,
            None => SameEntity::default(),
        };
        let entities = match &self.entities {
            Some(p) => EntityMap::from_file(p).map_err(|e| cfg_err(&e))?,
            None => EntityMap::bundled(),
        };
        let signatures = match &self.signatures {
            Some(p) => load_signatures_file(p).map_err(|e| cfg_err(&e))?,
            None => bundled_signatures(),
        };
        let intrusive = match &self.intrusive {
            Some(p) => parse_intrusive(
                &std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            ),
            None => bundled_intrusive(),
        };
        Ok(Resources { psl, allowlist, aliases, entities, signatures, intrusive })
    }
}

/// Everything a subcommand may need, validated.
pub struct Resources {
    pub psl: SuffixList,
    pub allowlist: Allowlist,
    pub aliases: SameEntity,
    pub entities: EntityMap,
    pub signatures: Vec<TrackerSignature>,
    pub intrusive: std::collections::BTreeSet<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let m = parse_config("# c\npsl = data/psl.dat\nparallel=4 # four\n\n").unwrap();
        assert_eq!(m["psl"], "data/psl.dat");
        assert_eq!(m["parallel"], "4");
        assert!(parse_config("nope=1").is_err());
        assert!(parse_config("psl").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ta.conf");
        std::fs::write(&path, "parallel=3\ntimeout=7\npsl=list.dat\n").unwrap();
        let cfg = RunConfig::resolve(Some(&path), &Overrides { parallel: Some(9), ..Default::default() }).unwrap();
        assert_eq!(cfg.parallel, 9);
        assert_eq!(cfg.timeout, Duration::from_secs(7));
        assert_eq!(cfg.psl.as_deref(), Some(dir.path().join("list.dat").as_path()));
        assert!(cfg.load().is_err());
    }
}
