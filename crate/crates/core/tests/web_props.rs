use trackaudit_core::domain::SuffixList;
use trackaudit_core::web::{
    fetch_batch, ingest_capture, site_report, static_fetch, FetchOptions, Party, ResourceKind, Strategy as Found, WebError,
};
use trackaudit_testkit::fixtures::CaptureBuilder;
use trackaudit_testkit::properties;
use trackaudit_testkit::server::{consent_site_routes, dead_address, FixtureServer};

fn psl() -> &'static SuffixList {
    properties::icann_psl()
}

#[test]
fn dedupe_matches_set_oracle() {
    properties::dedupe_matches_set_oracle(256).unwrap();
}

#[test]
fn locator_strategy_priority() {
    properties::locator_strategy_priority(256).unwrap();
}

fn local_opts(server: &FixtureServer) -> FetchOptions {
    FetchOptions {
        resolve: vec![("site.test".into(), server.addr()), ("tracker.test".into(), server.addr())],
        timeout: std::time::Duration::from_secs(10),
        ..FetchOptions::default()
    }
}

#[test]
fn static_fetch_follows_redirects_and_classifies() {
    let server = FixtureServer::start(consent_site_routes());
    let session = static_fetch(&server.url("site.test", "/"), &local_opts(&server), psl()).unwrap();
    let mut cookies: Vec<(String, Party)> = session.cookies.iter().map(|c| (c.name.clone(), c.party)).collect();
    cookies.sort();
    assert_eq!(
        cookies,
        [("lang".to_string(), Party::First), ("sid".to_string(), Party::First), ("uid".to_string(), Party::Third)]
    );
    assert!(session.cookies.iter().all(|c| c.value_hash.len() == 64));
    let third: Vec<_> = session.requests.iter().filter(|r| r.party == Party::Third).collect();
    assert_eq!(third.len(), 1);
    assert_eq!(third[0].host, "tracker.test");
    assert_eq!(third[0].resource_kind, ResourceKind::Image);
    let banner = session.banner.unwrap();
    assert_eq!(banner.strategy, Found::ByClass);
    assert_eq!(banner.matched_text.as_deref(), Some("Ok, tout accepter"));
}

#[test]
fn dead_host_is_a_failure_not_a_panic() {
    let dead = dead_address();
    let err = static_fetch(&format!("http://{dead}/"), &FetchOptions::default(), psl()).unwrap_err();
    assert!(matches!(err, WebError::Connect(_)), "{err:?}");

    let server = FixtureServer::start(consent_site_routes());
    let sites = vec![server.url("site.test", "/"), format!("http://dead.test:{}/", dead.port())];
    let mut opts = local_opts(&server);
    opts.resolve.push(("dead.test".into(), dead));
    let out = fetch_batch(&sites, &opts, psl(), 2);
    assert_eq!(out.sessions.len(), 1);
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].kind, "connect");
}

#[test]
fn missing_page_and_redirect_loop() {
    let server = FixtureServer::start(vec![
        trackaudit_testkit::server::Route::new("site.test", "/loop").status(302).header("Location", "/loop"),
    ]);
    let opts = local_opts(&server);
    let err = static_fetch(&server.url("site.test", "/nothing"), &opts, psl()).unwrap_err();
    assert!(matches!(err, WebError::HttpError(404)));
    let err = static_fetch(&server.url("site.test", "/loop"), &opts, psl()).unwrap_err();
    assert!(matches!(err, WebError::TooManyRedirects(5)));
}

#[test]
fn post_consent_capture_adds_third_party_cookies() {
    let pre = CaptureBuilder::new("https://www.mairie-exemple.fr/", "pre-consent")
        .cookie("PHPSESSID", "www.mairie-exemple.fr")
        .cookie("_ga", ".mairie-exemple.fr")
        .request("https://www.googletagmanager.com/gtm.js", "script");
    let post = CaptureBuilder::new("https://www.mairie-exemple.fr/", "post-consent")
        .cookie("PHPSESSID", "www.mairie-exemple.fr")
        .cookie("IDE", ".doubleclick.net")
        .cookie("fr", ".facebook.com")
        .request("https://connect.facebook.net/fr_FR/fbevents.js", "script");
    let pre = ingest_capture(&pre.to_json(), psl()).unwrap();
    let post_session = ingest_capture(&post.to_json(), psl()).unwrap();
    let summary = site_report(&pre, Some(&post_session), psl()).unwrap();
    assert_eq!(summary.pre.third_cookies, 0);
    assert_eq!(summary.post.unwrap().third_cookies, 2);
    assert_eq!(summary.delta.unwrap().third_cookies, 2);
    assert!(summary.third_cookie_domains.iter().any(|d| d.as_str() == "doubleclick.net"));
}
