use std::collections::HashSet;
use std::time::SystemTime;

use chrono::{DateTime, Duration, Utc};

use super::CookieRecord;
use crate::domain::SuffixList;

/// Identity used for deduplication: the cookie name plus the registrable
/// domain of its domain attribute. Domains without one (IPs aside) fall back
/// to the normalized domain text so they still dedupe among themselves.
pub fn cookie_key(cookie: &CookieRecord, psl: &SuffixList) -> (String, String) {
    let domain = cookie.cookie_domain.trim_start_matches('.');
    let key = match psl.registrable_domain(domain) {
        Ok(d) => d.as_str().to_string(),
        Err(_) => domain.to_ascii_lowercase(),
    };
    (cookie.name.clone(), key)
}

/// Keeps the first record per [`cookie_key`], preserving input order.
pub fn dedupe_cookies(cookies: &[CookieRecord], psl: &SuffixList) -> Vec<CookieRecord> {
    let mut seen = HashSet::new();
    cookies.iter().filter(|c| seen.insert(cookie_key(c, psl))).cloned().collect()
}

/// The parts of a `Set-Cookie` header this tool keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCookie {
    pub name: String,
    pub value: String,
    /// `Domain` attribute, if any.
    pub domain: Option<String>,
    pub expires: Option<DateTime<Utc>>,
}

/// Parses one `Set-Cookie` header value. `Max-Age` wins over `Expires`;
/// `now` anchors relative lifetimes. Returns `None` for nameless cookies.
pub fn parse_set_cookie(header: &str, now: DateTime<Utc>) -> Option<SetCookie> {
    let mut parts = header.split(';');
    let (name, value) = parts.next()?.split_once('=')?;
    let name = name.trim();
    if name.is_empty() {
        return None;
    }
    let mut domain = None;
    let mut expires = None;
    let mut max_age = None;
    for attr in parts {
        let (key, val) = match attr.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (attr.trim(), ""),
        };
        match key.to_ascii_lowercase().as_str() {
            "domain" if !val.is_empty() => domain = Some(val.to_ascii_lowercase()),
            "expires" => {
                expires = httpdate::parse_http_date(val).ok().map(DateTime::<Utc>::from);
            }
            "max-age" => {
                if let Ok(secs) = val.parse::<i64>() {
                    max_age = Some(if secs <= 0 {
                        DateTime::<Utc>::from(SystemTime::UNIX_EPOCH)
                    } else {
                        now + Duration::seconds(secs)
                    });
                }
            }
            _ => {}
        }
    }
    Some(SetCookie {
        name: name.to_string(),
        value: value.trim().trim_matches('"').to_string(),
        domain,
        expires: max_age.or(expires),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::web::Party;
    use chrono::TimeZone;

    fn rec(name: &str, domain: &str) -> CookieRecord {
        CookieRecord {
            name: name.into(),
            cookie_domain: domain.into(),
            value_hash: String::new(),
            expires: None,
            party: Party::Third,
        }
    }

    #[test]
    fn consent_duplicates_collapse() {
        let psl = SuffixList::bundled();
        let mut a = rec("CONSENT", ".google.com");
        a.value_hash = "first".into();
        let cookies = vec![a, rec("CONSENT", "www.google.com"), rec("NID", ".google.com")];
        let out = dedupe_cookies(&cookies, &psl);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].value_hash, "first");
        assert_eq!(out[1].name, "NID");
    }

    #[test]
    fn disjoint_unchanged() {
        let psl = SuffixList::bundled();
        let cookies = vec![rec("a", "x.com"), rec("b", "x.com"), rec("a", "y.com")];
        assert_eq!(dedupe_cookies(&cookies, &psl), cookies);
    }

    #[test]
    fn set_cookie_attributes() {
        let now = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
        let c = parse_set_cookie("IDE=abc; Domain=.doubleclick.net; Path=/; Expires=Fri, 21 Oct 2022 07:28:00 GMT; Secure", now)
            .unwrap();
        assert_eq!(c.name, "IDE");
        assert_eq!(c.value, "abc");
        assert_eq!(c.domain.as_deref(), Some(".doubleclick.net"));
        assert_eq!(c.expires, Some(Utc.with_ymd_and_hms(2022, 10, 21, 7, 28, 0).unwrap()));

        let c = parse_set_cookie("s=1; max-age=60; expires=Fri, 21 Oct 2022 07:28:00 GMT", now).unwrap();
        assert_eq!(c.expires, Some(now + Duration::seconds(60)));
        assert_eq!(c.domain, None);

        assert!(parse_set_cookie("=novalue", now).is_none());
        assert!(parse_set_cookie("garbage", now).is_none());
    }
}
