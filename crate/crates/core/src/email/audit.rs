use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::extract::extract_urls;
use super::mime::parse_message;
use super::EmailError;
use crate::domain::{Allowlist, LoadKind, OriginKind, RegistrableDomain, SuffixList, UrlFinding};
use crate::par;

/// Redacted audit result for one message. Only registrable domains are kept;
/// paths, queries and (unless debug hosts are on) hostnames are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailAuditRecord {
    /// Caller-supplied label, e.g. the file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub message_id_hash: String,
    pub sender_domain: RegistrableDomain,
    pub loaded_external: BTreeSet<RegistrableDomain>,
    pub linkonly_external: BTreeSet<RegistrableDomain>,
    pub internal_count: u64,
    pub allowlisted_count: u64,
    /// URLs whose host has no registrable domain (`http://t`, say).
    #[serde(default)]
    pub unclassified_count: u64,
    /// Subset of `loaded_external` seen only through `<script>`/`<iframe>`.
    #[serde(default)]
    pub script_or_frame_only: BTreeSet<RegistrableDomain>,
    /// External domains serving at least one 1x1 image.
    #[serde(default)]
    pub pixel_domains: BTreeSet<RegistrableDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug_hosts: Option<BTreeMap<RegistrableDomain, BTreeSet<String>>>,
}

impl EmailAuditRecord {
    /// External loaded domains restricted to images and styles.
    pub fn loaded_images_and_styles(&self) -> BTreeSet<RegistrableDomain> {
        self.loaded_external
            .difference(&self.script_or_frame_only)
            .cloned()
            .collect()
    }
}

/// Shared, read-only audit configuration.
#[derive(Debug, Clone, Copy)]
pub struct EmailAuditor<'a> {
    pub psl: &'a SuffixList,
    pub allowlist: &'a Allowlist,
    pub debug_hosts: bool,
}

impl<'a> EmailAuditor<'a> {
    pub fn new(psl: &'a SuffixList, allowlist: &'a Allowlist) -> Self {
        EmailAuditor { psl, allowlist, debug_hosts: false }
    }

    pub fn with_debug_hosts(mut self, on: bool) -> Self {
        self.debug_hosts = on;
        self
    }

    pub fn audit(&self, raw: &[u8]) -> Result<EmailAuditRecord, EmailError> {
        let msg = parse_message(raw, self.psl)?;
        let sender = msg.sender_domain;
        let mut loaded_external = BTreeSet::new();
        let mut linkonly_external = BTreeSet::new();
        let mut loaded_by_plain = BTreeSet::new();
        let mut script_or_frame = BTreeSet::new();
        let mut pixel_domains = BTreeSet::new();
        let mut hosts: BTreeMap<RegistrableDomain, BTreeSet<String>> = BTreeMap::new();
        let (mut internal, mut allowlisted, mut unclassified) = (0u64, 0u64, 0u64);

        // Plain-text parts cannot load anything; only HTML drives findings.
        for part in msg.body_parts.iter().filter(|p| p.is_html()) {
            let urls = extract_urls(&part.text);
            let candidates = urls
                .loaded
                .iter()
                .map(|l| (&l.url, LoadKind::Loaded, Some(l)))
                .chain(urls.linkonly.iter().map(|u| (u, LoadKind::LinkOnly, None)));
            for (url, kind, loaded) in candidates {
                let finding = match UrlFinding::classify(url, kind, &sender, self.allowlist, self.psl) {
                    Ok(f) => f,
                    Err(e) => {
                        log::debug!("unclassifiable URL host: {e}");
                        unclassified += 1;
                        continue;
                    }
                };
                match finding.origin_kind {
                    OriginKind::Internal => internal += 1,
                    OriginKind::Allowlisted => allowlisted += 1,
                    OriginKind::External => {
                        if self.debug_hosts {
                            hosts.entry(finding.domain.clone()).or_default().insert(finding.host.clone());
                        }
                        match (kind, loaded) {
                            (LoadKind::Loaded, Some(l)) => {
                                if l.source.is_script_or_frame() {
                                    script_or_frame.insert(finding.domain.clone());
                                } else {
                                    loaded_by_plain.insert(finding.domain.clone());
                                }
                                if l.pixel {
                                    pixel_domains.insert(finding.domain.clone());
                                }
                                loaded_external.insert(finding.domain);
                            }
                            _ => {
                                linkonly_external.insert(finding.domain);
                            }
                        }
                    }
                }
            }
        }

        let script_or_frame_only = script_or_frame.difference(&loaded_by_plain).cloned().collect();
        Ok(EmailAuditRecord {
            source: None,
            message_id_hash: msg.identity_hash,
            sender_domain: sender,
            loaded_external,
            linkonly_external,
            internal_count: internal,
            allowlisted_count: allowlisted,
            unclassified_count: unclassified,
            script_or_frame_only,
            pixel_domains,
            debug_hosts: self.debug_hosts.then_some(hosts),
        })
    }

    /// Audits `(label, raw message)` pairs, one independent task each.
    pub fn audit_batch(&self, messages: &[(String, Vec<u8>)]) -> Vec<Result<EmailAuditRecord, EmailError>> {
        par::map(messages, |(label, raw)| {
            self.audit(raw).map(|mut r| {
                r.source = Some(label.clone());
                r
            })
        })
    }
}

/// Audits one message against the sender's domain and the allowlist.
pub fn audit_email(raw: &[u8], psl: &SuffixList, allowlist: &Allowlist) -> Result<EmailAuditRecord, EmailError> {
    EmailAuditor::new(psl, allowlist).audit(raw)
}
