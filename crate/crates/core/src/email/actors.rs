use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EmailAuditRecord;
use crate::domain::{RegistrableDomain, SameEntity};
use crate::trackerdb::EntityMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRow {
    pub actor: String,
    /// Sorted, deduplicated source labels.
    pub sources: Vec<String>,
}

/// Which sources loaded content from which outside actor.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorTable {
    pub rows: Vec<ActorRow>,
}

/// One row per distinct loaded external domain.
pub fn actor_table<'a, I>(entries: I) -> ActorTable
where
    I: IntoIterator<Item = (&'a str, &'a EmailAuditRecord)>,
{
    actor_table_with_aliases(entries, &SameEntity::default())
}

/// Like [`actor_table`], but drops domains the alias groups tie to the
/// record's own sender.
pub fn actor_table_with_aliases<'a, I>(entries: I, aliases: &SameEntity) -> ActorTable
where
    I: IntoIterator<Item = (&'a str, &'a EmailAuditRecord)>,
{
    let mut by_actor: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (label, record) in entries {
        for domain in &record.loaded_external {
            if aliases.same(domain, &record.sender_domain) {
                continue;
            }
            by_actor
                .entry(domain.as_str().to_string())
                .or_default()
                .insert(label.to_string());
        }
    }
    ActorTable::from_map(by_actor)
}

impl ActorTable {
    fn from_map(map: BTreeMap<String, BTreeSet<String>>) -> Self {
        ActorTable {
            rows: map
                .into_iter()
                .map(|(actor, sources)| ActorRow { actor, sources: sources.into_iter().collect() })
                .collect(),
        }
    }

    /// Regroups domain rows under their owning entity.
    pub fn by_entity(&self, entities: &EntityMap) -> ActorTable {
        let mut merged: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for row in &self.rows {
            let entity = match RegistrableDomain::from_serialized(&row.actor) {
                Ok(d) => entities.attribute(&d).to_string(),
                Err(_) => entities.fallback().to_string(),
            };
            merged.entry(entity).or_default().extend(row.sources.iter().cloned());
        }
        ActorTable::from_map(merged)
    }

    pub fn get(&self, actor: &str) -> Option<&ActorRow> {
        self.rows.iter().find(|r| r.actor == actor)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SuffixList;

    fn record(psl: &SuffixList, sender: &str, loaded: &[&str]) -> EmailAuditRecord {
        EmailAuditRecord {
            source: None,
            message_id_hash: String::new(),
            sender_domain: psl.registrable_domain(sender).unwrap(),
            loaded_external: loaded.iter().map(|h| psl.registrable_domain(h).unwrap()).collect(),
            linkonly_external: BTreeSet::new(),
            internal_count: 0,
            allowlisted_count: 0,
            unclassified_count: 0,
            script_or_frame_only: BTreeSet::new(),
            pixel_domains: BTreeSet::new(),
            debug_hosts: None,
        }
    }

    #[test]
    fn empty_input_empty_table() {
        assert!(actor_table(std::iter::empty()).is_empty());
    }

    #[test]
    fn identical_records_do_not_duplicate() {
        let psl = SuffixList::bundled();
        let a = record(&psl, "lescrous.fr", &["stats.iroquois.fr", "fonts.googleapis.com"]);
        let b = a.clone();
        let t = actor_table([("Crous", &a), ("Crous", &b)]);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.sources == vec!["Crous".to_string()]));
    }

    #[test]
    fn aliases_drop_same_entity() {
        let psl = SuffixList::bundled();
        let a = record(&psl, "lescrous.fr", &["media.etudiant.gouv.fr", "stats.iroquois.fr"]);
        let aliases = SameEntity::parse("lescrous.fr etudiant.gouv.fr", &psl).unwrap();
        let t = actor_table_with_aliases([("Crous", &a)], &aliases);
        assert_eq!(t.rows.iter().map(|r| r.actor.as_str()).collect::<Vec<_>>(), vec!["iroquois.fr"]);
    }
}
