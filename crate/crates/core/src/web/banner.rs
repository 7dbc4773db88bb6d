use scraper::{ElementRef, Html};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ACCEPT_TEXTS: [&str; 5] = ["Accepter", "Ok, tout accepter", "Oui, je suis d'accord", "Ok", "J'accepte"];

/// Class tokens of widely deployed consent managers' accept controls.
pub const DEFAULT_CLASS_HINTS: [&str; 4] = ["cookie-accept", "accept-cookies", "cc-allow", "tarteaucitronAllow"];

pub const DEFAULT_ID_HINTS: [&str; 4] =
    ["didomi-notice-agree-button", "onetrust-accept-btn-handler", "tarteaucitronPersonalize2", "cookie-accept"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    ByClass,
    ById,
    ByText,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BannerProbe {
    pub matched: bool,
    pub strategy: Strategy,
    pub matched_text: Option<String>,
}

impl BannerProbe {
    fn none() -> Self {
        BannerProbe { matched: false, strategy: Strategy::None, matched_text: None }
    }

    fn hit(strategy: Strategy, text: String) -> Self {
        BannerProbe { matched: true, strategy, matched_text: (!text.is_empty()).then_some(text) }
    }
}

/// Case-folded, whitespace-collapsed, typographic apostrophes made plain.
fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace(['\u{2019}', '\u{2018}'], "'").to_lowercase()
}

fn visible_text(el: &ElementRef<'_>) -> String {
    let text: String = el.text().collect();
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if text.is_empty() && el.value().name() == "input" {
        return el.value().attr("value").unwrap_or("").trim().to_string();
    }
    text
}

fn is_clickable(el: &ElementRef<'_>) -> bool {
    match el.value().name() {
        "a" | "button" => true,
        "input" => matches!(
            el.value().attr("type").map(|t| t.trim().to_ascii_lowercase()).as_deref(),
            Some("submit") | Some("button")
        ),
        _ => false,
    }
}

/// Finds the consent accept control: first by class token, then by id, then
/// by the text of clickable elements. Within each stage hints are tried in
/// the given order and, for each hint, elements in document order.
pub fn locate_consent_button<S: AsRef<str>>(
    html: &str,
    accept_texts: &[S],
    class_hints: &[S],
    id_hints: &[S],
) -> BannerProbe {
    let doc = Html::parse_document(html);
    let elements: Vec<ElementRef<'_>> = doc.root_element().descendants().filter_map(ElementRef::wrap).collect();

    for hint in class_hints.iter().map(|h| h.as_ref().trim().to_lowercase()).filter(|h| !h.is_empty()) {
        if let Some(el) = elements.iter().find(|el| el.value().classes().any(|c| c.to_lowercase() == hint)) {
            return BannerProbe::hit(Strategy::ByClass, visible_text(el));
        }
    }
    for hint in id_hints.iter().map(|h| h.as_ref().trim()).filter(|h| !h.is_empty()) {
        if let Some(el) = elements.iter().find(|el| el.value().id().is_some_and(|id| id.trim().eq_ignore_ascii_case(hint))) {
            return BannerProbe::hit(Strategy::ById, visible_text(el));
        }
    }
    let clickable: Vec<(String, String)> = elements
        .iter()
        .filter(|el| is_clickable(el))
        .map(|el| {
            let text = visible_text(el);
            (normalize(&text), text)
        })
        .collect();
    for want in accept_texts.iter().map(|t| normalize(t.as_ref())).filter(|t| !t.is_empty()) {
        if let Some((_, text)) = clickable.iter().find(|(norm, _)| *norm == want) {
            return BannerProbe::hit(Strategy::ByText, text.clone());
        }
    }
    BannerProbe::none()
}

/// [`locate_consent_button`] with the default texts and hints.
pub fn locate_with_defaults(html: &str) -> BannerProbe {
    locate_consent_button(html, &DEFAULT_ACCEPT_TEXTS, &DEFAULT_CLASS_HINTS, &DEFAULT_ID_HINTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NONE: [&str; 0] = [];

    #[test]
    fn class_hint() {
        let p = locate_consent_button(r#"<button id="x" class="cookie-accept">Ok</button>"#, &NONE, &["cookie-accept"], &NONE);
        assert!(p.matched);
        assert_eq!(p.strategy, Strategy::ByClass);
        assert_eq!(p.matched_text.as_deref(), Some("Ok"));
    }

    #[test]
    fn text_match() {
        let p = locate_consent_button("<a>J'accepte</a>", &DEFAULT_ACCEPT_TEXTS, &NONE, &NONE);
        assert_eq!(p, BannerProbe { matched: true, strategy: Strategy::ByText, matched_text: Some("J'accepte".into()) });
    }

    #[test]
    fn text_normalization() {
        let html = "<div><button>  OK,\n   TOUT   accepter </button><a>J\u{2019}accepte</a></div>";
        let p = locate_consent_button(html, &["Ok, tout accepter"], &NONE, &NONE);
        assert_eq!(p.matched_text.as_deref(), Some("OK, TOUT accepter"));
        let p = locate_consent_button(html, &["J'accepte"], &NONE, &NONE);
        assert_eq!(p.strategy, Strategy::ByText);
    }

    #[test]
    fn only_clickables_and_exact_text() {
        let html = r#"<p>Accepter</p><span>Ok</span><button>Accepter et continuer</button><input type="text" value="Ok">"#;
        assert_eq!(locate_with_defaults(html).strategy, Strategy::None);
        let p = locate_with_defaults(r#"<input type="submit" value="Accepter">"#);
        assert_eq!(p.strategy, Strategy::ByText);
    }

    #[test]
    fn priority_class_then_id_then_text() {
        let html = r#"<a>Ok</a><div id="accept-btn">x</div><span class="cc-allow">y</span>"#;
        assert_eq!(locate_consent_button(html, &["Ok"], &["cc-allow"], &["accept-btn"]).strategy, Strategy::ByClass);
        assert_eq!(locate_consent_button(html, &["Ok"], &[], &["accept-btn"]).strategy, Strategy::ById);
        assert_eq!(locate_consent_button(html, &["Ok"], &[], &[]).strategy, Strategy::ByText);
    }

    #[test]
    fn text_list_order_beats_document_order() {
        let p = locate_consent_button("<a>Ok</a><a>Accepter</a>", &DEFAULT_ACCEPT_TEXTS, &NONE, &NONE);
        assert_eq!(p.matched_text.as_deref(), Some("Accepter"));
    }

    #[test]
    fn nothing_found() {
        let p = locate_with_defaults("<p>Bienvenue</p>");
        assert_eq!(p, BannerProbe { matched: false, strategy: Strategy::None, matched_text: None });
        assert!(!locate_with_defaults("").matched);
    }
}
