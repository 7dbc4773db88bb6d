use mailparse::{DispositionType, MailAddr, MailHeaderMap, ParsedMail};

use super::EmailError;
use crate::digest::sha256_hex;
use crate::domain::{RegistrableDomain, SuffixList};

/// A decoded text part of a message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BodyPart {
    /// Lowercase media type, `text/html` or `text/plain`.
    pub media_type: String,
    pub text: String,
}

impl BodyPart {
    pub fn is_html(&self) -> bool {
        self.media_type == "text/html"
    }
}

#[derive(Debug, Clone)]
pub struct ParsedMessage {
    pub sender_domain: RegistrableDomain,
    pub body_parts: Vec<BodyPart>,
    /// Digest of the Message-ID header, or of From/Date/Subject when the
    /// message has none. Body content never feeds it.
    pub identity_hash: String,
    pub warnings: Vec<String>,
}

/// Parses a raw RFC 5322 message and decodes every inline text part.
pub fn parse_message(raw: &[u8], psl: &SuffixList) -> Result<ParsedMessage, EmailError> {
    let mail = mailparse::parse_mail(raw)?;
    let mut warnings = Vec::new();

    let from = mail
        .headers
        .get_first_header("From")
        .ok_or(EmailError::MissingFromHeader)?;
    let addrs = mailparse::addrparse_header(from).map_err(|_| EmailError::MissingFromHeader)?;
    let mut mailboxes = addrs.iter().flat_map(|a| match a {
        MailAddr::Single(s) => vec![s.addr.clone()],
        MailAddr::Group(g) => g.addrs.iter().map(|s| s.addr.clone()).collect(),
    });
    let first = mailboxes.next().ok_or(EmailError::MissingFromHeader)?;
    let extra = mailboxes.count();
    if extra > 0 {
        let msg = format!("From header lists {} addresses; using the first", extra + 1);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (_, host) = first
        .rsplit_once('@')
        .ok_or_else(|| EmailError::BadSender(first.clone()))?;
    let sender_domain = psl
        .registrable_domain(host)
        .map_err(|e| EmailError::SenderDomain(host.to_string(), e))?;

    let identity_hash = match mail.headers.get_first_value("Message-ID") {
        Some(id) if !id.trim().is_empty() => sha256_hex(id.trim().as_bytes()),
        _ => {
            let h = &mail.headers;
            let key = ["From", "Date", "Subject"]
                .iter()
                .map(|name| h.get_first_value(name).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n");
            sha256_hex(key.as_bytes())
        }
    };

    let mut body_parts = Vec::new();
    collect_parts(&mail, &mut body_parts, &mut warnings);
    Ok(ParsedMessage { sender_domain, body_parts, identity_hash, warnings })
}

fn collect_parts(part: &ParsedMail<'_>, out: &mut Vec<BodyPart>, warnings: &mut Vec<String>) {
    if !part.subparts.is_empty() {
        for sub in &part.subparts {
            collect_parts(sub, out, warnings);
        }
        return;
    }
    let media_type = part.ctype.mimetype.to_ascii_lowercase();
    if media_type != "text/html" && media_type != "text/plain" {
        return;
    }
    if part.get_content_disposition().disposition == DispositionType::Attachment {
        return;
    }
    match part.get_body() {
        Ok(text) => out.push(BodyPart { media_type, text }),
        Err(e) => {
            let msg = format!("skipping undecodable {media_type} part: {e}");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
}
