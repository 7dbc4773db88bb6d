//! The core property suite as plain functions, so integration tests and the
//! acceptance run share one definition. Each returns `Err` with the minimal
//! failing input on a counterexample.

use std::collections::HashSet;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use trackaudit_core::app::scan_classes;
use trackaudit_core::domain::{classify_origin, Allowlist, SuffixList, BUNDLED_LIST};
use trackaudit_core::email::EmailAuditor;
use trackaudit_core::report::{domain_tallies, TallyAccumulator};
use trackaudit_core::trackerdb::{load_signatures, TrackerSignature};
use trackaudit_core::web::{
    dedupe_cookies, ingest_capture, locate_consent_button, CaptureSession, CookieRecord, Party, Strategy as Found,
    DEFAULT_ACCEPT_TEXTS,
};

use crate::fixtures::CaptureBuilder;
use crate::oracle::{naive_scan, BruteForcePsl};
use crate::strategies::{class_name, host_from_rules, label, url_tail};

pub fn icann_psl() -> &'static SuffixList {
    static PSL: OnceLock<SuffixList> = OnceLock::new();
    PSL.get_or_init(SuffixList::bundled)
}

pub fn full_psl() -> &'static SuffixList {
    static PSL: OnceLock<SuffixList> = OnceLock::new();
    PSL.get_or_init(|| SuffixList::parse_with(BUNDLED_LIST, true))
}

fn icann_oracle() -> &'static BruteForcePsl {
    static ORACLE: OnceLock<BruteForcePsl> = OnceLock::new();
    ORACLE.get_or_init(BruteForcePsl::bundled)
}

fn full_oracle() -> &'static BruteForcePsl {
    static ORACLE: OnceLock<BruteForcePsl> = OnceLock::new();
    ORACLE.get_or_init(|| BruteForcePsl::full(BUNDLED_LIST))
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: Debug,
{
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() }).run(&strategy, test).map_err(|e| e.to_string())
}

/// Registrable-domain lookup agrees with the brute-force oracle, under the
/// ICANN section and under the full list.
pub fn registrable_domain_matches_oracle(cases: u32) -> Result<(), String> {
    for (psl, oracle) in [(icann_psl(), icann_oracle()), (full_psl(), full_oracle())] {
        check(cases, host_from_rules(Arc::new(oracle.rules().to_vec())), |host| {
            let got = psl.registrable_domain(&host).ok().map(|d| d.as_str().to_string());
            prop_assert_eq!(got, oracle.registrable_domain(&host), "host {}", host);
            Ok(())
        })?;
    }
    Ok(())
}

const SUFFIXES: [&str; 6] = ["fr", "gouv.fr", "com", "net", "co.uk", "org"];

/// Registrable hosts under a handful of common suffixes. Hosts that are
/// themselves public suffixes (`nom.fr`, `ac.uk`) are rejected.
pub fn email_host() -> impl Strategy<Value = String> {
    (prop::collection::vec(label(), 1..=3), prop::sample::select(&SUFFIXES[..]))
        .prop_map(|(l, s)| format!("{}.{s}", l.join(".")))
        .prop_filter("host must have a registrable domain", |h| icann_psl().registrable_domain(h).is_ok())
}

/// An HTML message from `sender` loading `loaded` through stylesheets, style
/// `url()` and 1x1 images, and linking to `links`.
pub fn html_message(sender: &str, loaded: &[String], links: &[String]) -> Vec<u8> {
    let mut html = String::from("<html><head>");
    for (i, u) in loaded.iter().enumerate() {
        match i % 3 {
            0 => html.push_str(&format!("<link rel=\"stylesheet\" href=\"{u}\">")),
            1 => html.push_str(&format!("<style>.x{{background:url('{u}')}}</style>")),
            _ => {}
        }
    }
    html.push_str("</head><body>");
    for (i, u) in loaded.iter().enumerate() {
        if i % 3 == 2 {
            html.push_str(&format!("<img src=\"{u}\" width=\"1\" height=\"1\">"));
        }
    }
    for u in links {
        html.push_str(&format!("<p><a href=\"{u}\">lien</a></p>"));
    }
    html.push_str("</body></html>");
    format!(
        "From: Service <info@{sender}>\r\nTo: a@example.org\r\nSubject: test\r\nMessage-ID: <1@{sender}>\r\n\
         MIME-Version: 1.0\r\nContent-Type: text/html; charset=utf-8\r\n\r\n{html}\r\n"
    )
    .into_bytes()
}

/// Origin classification depends only on scheme and host.
pub fn origin_ignores_url_tail(cases: u32) -> Result<(), String> {
    let strategy = (email_host(), email_host(), url_tail(), url_tail(), any::<bool>(), any::<bool>());
    check(cases, strategy, |(h, sender, a, b, https, allow_it)| {
        let psl = icann_psl();
        let sender = psl.registrable_domain(&sender).unwrap();
        let mut allow = Allowlist::empty();
        if allow_it {
            allow.insert(psl.registrable_domain(&h).unwrap());
        }
        let scheme = if https { "https" } else { "http" };
        let bare = classify_origin(&format!("{scheme}://{h}/"), &sender, &allow, psl).unwrap();
        let x = classify_origin(&format!("{scheme}://{h}{a}"), &sender, &allow, psl).unwrap();
        let y = classify_origin(&format!("{scheme}://{h}{b}"), &sender, &allow, psl).unwrap();
        prop_assert_eq!(x, bare);
        prop_assert_eq!(y, bare);
        Ok(())
    })
}

/// A token planted in URL paths, queries and fragments never reaches the
/// serialized record, with or without debug hosts.
pub fn records_never_leak_url_tails(cases: u32) -> Result<(), String> {
    let strategy = (
        email_host(),
        prop::collection::vec(email_host(), 1..6),
        prop::collection::vec(email_host(), 0..4),
        "Zz[A-Z0-9]{10}",
        any::<bool>(),
    );
    check(cases, strategy, |(sender, loaded_hosts, link_hosts, token, debug)| {
        let tails = |hosts: &[String]| -> Vec<String> {
            hosts.iter().enumerate().map(|(i, h)| format!("https://{h}/p{i}/{token}/x?u={token}#{token}")).collect()
        };
        let raw = html_message(&sender, &tails(&loaded_hosts), &tails(&link_hosts));
        let allow = Allowlist::default();
        let record = EmailAuditor::new(icann_psl(), &allow).with_debug_hosts(debug).audit(&raw).unwrap();
        let json = serde_json::to_string(&record).unwrap();
        prop_assert!(!json.contains(&token), "token leaked: {}", json);
        prop_assert!(!json.contains("/p0/"));
        Ok(())
    })
}

const COOKIE_BASES: [&str; 4] = ["example.fr", "impots.gouv.fr", "doubleclick.net", "bbc.co.uk"];

/// A cookie plus the registrable domain its domain attribute belongs to.
pub fn cookie() -> impl Strategy<Value = (CookieRecord, String)> {
    (
        prop::sample::select(&["_ga", "IDE", "sid", "uid"][..]),
        prop::sample::select(&COOKIE_BASES[..]),
        prop::option::of(label()),
        any::<bool>(),
        "[a-f0-9]{4}",
    )
        .prop_map(|(name, base, sub, dot, hash)| {
            let host = match sub {
                Some(s) => format!("{s}.{base}"),
                None => base.to_string(),
            };
            let domain = if dot { format!(".{host}") } else { host };
            let c = CookieRecord { name: name.into(), cookie_domain: domain, value_hash: hash, expires: None, party: Party::Third };
            (c, base.to_string())
        })
}

/// Dedupe keeps the first cookie per (name, registrable domain), in order.
pub fn dedupe_matches_set_oracle(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec(cookie(), 0..40), |cookies| {
        let records: Vec<CookieRecord> = cookies.iter().map(|(c, _)| c.clone()).collect();
        let mut seen = HashSet::new();
        let expected: Vec<CookieRecord> =
            cookies.iter().filter(|(c, base)| seen.insert((c.name.clone(), base.clone()))).map(|(c, _)| c.clone()).collect();
        prop_assert_eq!(dedupe_cookies(&records, icann_psl()), expected);
        Ok(())
    })
}

fn signature_set() -> impl Strategy<Value = Vec<(String, Vec<String>)>> {
    prop::collection::vec(prop::collection::vec("[a-z]{1,3}(\\.[a-z]{1,3}){0,2}", 1..3), 1..50)
        .prop_map(|lists| lists.into_iter().enumerate().map(|(i, prefixes)| (format!("T{i:02}"), prefixes)).collect())
}

/// Builds signatures through the JSON loader from `(name, prefixes)` pairs.
pub fn to_signatures(sigs: &[(String, Vec<String>)]) -> Vec<TrackerSignature> {
    let json: Vec<serde_json::Value> =
        sigs.iter().map(|(name, prefixes)| serde_json::json!({"name": name, "code_signature": prefixes})).collect();
    load_signatures(&serde_json::to_string(&json).unwrap()).unwrap()
}

/// Class scanning agrees with the naive double loop.
pub fn scan_matches_naive_double_loop(cases: u32) -> Result<(), String> {
    check(cases, (prop::collection::vec(class_name(), 0..200), signature_set()), |(classes, sigs)| {
        prop_assert_eq!(scan_classes(&classes, &to_signatures(&sigs)), naive_scan(&classes, &sigs));
        Ok(())
    })
}

#[derive(Debug, Clone)]
enum El {
    ClassHit(String),
    IdHit,
    TextHit(usize, bool),
    Noise(String),
}

fn element() -> impl Strategy<Value = El> {
    prop_oneof![
        label().prop_map(El::ClassHit),
        Just(El::IdHit),
        (0..DEFAULT_ACCEPT_TEXTS.len(), any::<bool>()).prop_map(|(i, shout)| El::TextHit(i, shout)),
        "[a-z]{3,8} [a-z]{3,8}".prop_map(El::Noise),
    ]
}

fn render(el: &El) -> String {
    match el {
        El::ClassHit(text) => format!("<div class=\"banner cookie-accept\">{text}</div>"),
        El::IdHit => "<span id=\"accept-all\">go</span>".into(),
        El::TextHit(i, shout) => {
            let t = DEFAULT_ACCEPT_TEXTS[*i];
            let t = if *shout { t.to_uppercase().replace(' ', "  ") } else { t.to_string() };
            format!("<button type=\"button\">{t}</button>")
        }
        El::Noise(text) => format!("<a href=\"/x\" class=\"link\">{text}</a>"),
    }
}

/// The consent locator tries class hints, then ids, then accept texts.
pub fn locator_strategy_priority(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec(element(), 0..12), |els| {
        let html = format!("<html><body>{}</body></html>", els.iter().map(render).collect::<String>());
        let probe = locate_consent_button(&html, &DEFAULT_ACCEPT_TEXTS, &["cookie-accept"], &["accept-all"]);
        let first_class = els.iter().find_map(|e| match e {
            El::ClassHit(t) => Some(t.clone()),
            _ => None,
        });
        let expected = if first_class.is_some() {
            Found::ByClass
        } else if els.iter().any(|e| matches!(e, El::IdHit)) {
            Found::ById
        } else if els.iter().any(|e| matches!(e, El::TextHit(..))) {
            Found::ByText
        } else {
            Found::None
        };
        prop_assert_eq!(probe.strategy, expected);
        prop_assert_eq!(probe.matched, expected != Found::None);
        if let Some(t) = first_class {
            prop_assert_eq!(probe.matched_text, Some(t));
        }
        Ok(())
    })
}

pub const PLAN_SITES: [&str; 5] = ["mairie-a.fr", "cci-b.fr", "region-c.fr", "blog-d.com", "e.gouv.fr"];
pub const PLAN_THIRD: [&str; 5] = ["doubleclick.net", "google.com", "xiti.com", "facebook.com", "youtube.com"];

/// `(site index, cookies as (name, domain index, subdomain?), request domain indexes)`.
pub type SessionPlan = (usize, Vec<(u8, usize, bool)>, Vec<usize>);

pub fn session_plan() -> impl Strategy<Value = SessionPlan> {
    let domains = PLAN_SITES.len() + PLAN_THIRD.len();
    (
        0..PLAN_SITES.len(),
        prop::collection::vec((0u8..6, 0..domains, any::<bool>()), 0..25),
        prop::collection::vec(0..domains, 0..15),
    )
}

/// Domain index `i` over `PLAN_SITES` then `PLAN_THIRD`.
pub fn plan_domain(i: usize) -> &'static str {
    if i < PLAN_SITES.len() {
        PLAN_SITES[i]
    } else {
        PLAN_THIRD[i - PLAN_SITES.len()]
    }
}

/// A post-consent session realizing `plan`.
pub fn build_session(plan: &SessionPlan) -> CaptureSession {
    let (site, cookies, requests) = plan;
    let mut b = CaptureBuilder::new(&format!("https://www.{}/", PLAN_SITES[*site]), "post-consent");
    for (name, d, sub) in cookies {
        let domain = if *sub { format!("sub.{}", plan_domain(*d)) } else { format!(".{}", plan_domain(*d)) };
        b = b.cookie(&format!("c{name}"), &domain);
    }
    for r in requests {
        b = b.request(&format!("https://cdn.{}/x.js", plan_domain(*r)), "script");
    }
    ingest_capture(&b.to_json(), icann_psl()).unwrap()
}

/// Domain tallies do not depend on session order or on how partial
/// accumulators are grouped before merging.
pub fn tallies_ignore_input_order(cases: u32) -> Result<(), String> {
    check(cases, (prop::collection::vec(session_plan(), 0..12), any::<u64>()), |(plans, seed)| {
        let psl = icann_psl();
        let sessions: Vec<CaptureSession> = plans.iter().map(build_session).collect();
        let mut shuffled = sessions.clone();
        for i in (1..shuffled.len()).rev() {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let reversed: Vec<CaptureSession> = sessions.iter().rev().cloned().collect();
        let base = domain_tallies(&sessions, psl);
        prop_assert_eq!(&domain_tallies(&shuffled, psl), &base);
        prop_assert_eq!(&domain_tallies(&reversed, psl), &base);

        let mut left = TallyAccumulator::default();
        let mut right = TallyAccumulator::default();
        for (i, s) in sessions.iter().enumerate() {
            if i % 2 == 0 {
                left.add_session(s, psl)
            } else {
                right.add_session(s, psl)
            }
        }
        prop_assert_eq!(&right.clone().merge(left.clone()).finish(), &base);
        prop_assert_eq!(&left.merge(right).finish(), &base);
        Ok(())
    })
}

/// The suite run by the acceptance check, as `(name, property)`.
pub type Property = fn(u32) -> Result<(), String>;

pub const SUITE: [(&str, Property); 7] = [
    ("registrable_domain vs brute-force oracle", registrable_domain_matches_oracle),
    ("origin ignores path, query and fragment", origin_ignores_url_tail),
    ("redaction token absence", records_never_leak_url_tails),
    ("cookie dedupe vs set oracle", dedupe_matches_set_oracle),
    ("class scan vs naive double loop", scan_matches_naive_double_loop),
    ("consent locator strategy priority", locator_strategy_priority),
    ("tally order insensitivity", tallies_ignore_input_order),
];
