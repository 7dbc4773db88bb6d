//! Email channel: MIME parsing, loaded vs link-only URL extraction, sender
//! classification and redacted per-message records.

mod actors;
mod audit;
mod extract;
mod mime;

use thiserror::Error;

use crate::domain::DomainError;

pub use actors::{actor_table, actor_table_with_aliases, ActorRow, ActorTable};
pub use audit::{audit_email, EmailAuditRecord, EmailAuditor};
pub use extract::{extract_urls, extract_urls_with_base, ExtractedUrls, LoadedUrl, ResourceSource};
pub use mime::{parse_message, BodyPart, ParsedMessage};

#[derive(Debug, Error)]
pub enum EmailError {
    #[error("malformed message: {0}")]
    Parse(#[from] mailparse::MailParseError),
    #[error("message has no usable From address")]
    MissingFromHeader,
    #[error("sender address {0:?} has no domain part")]
    BadSender(String),
    #[error("sender domain {0:?}: {1}")]
    SenderDomain(String, #[source] DomainError),
}
