//! Loaded-resource versus link-only URL extraction from HTML.

use std::sync::OnceLock;

use regex::Regex;
use scraper::{ElementRef, Html};
use serde::{Deserialize, Serialize};
use url::Url;

/// Where a loaded URL came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResourceSource {
    Image,
    Source,
    InputImage,
    Stylesheet,
    Icon,
    CssUrl,
    Background,
    Script,
    Frame,
}

impl ResourceSource {
    /// Scripts and frames load automatically too, but are reported apart so
    /// the images-and-styles-only view stays recoverable.
    pub fn is_script_or_frame(self) -> bool {
        matches!(self, ResourceSource::Script | ResourceSource::Frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedUrl {
    pub url: Url,
    pub source: ResourceSource,
    /// `<img>` declared at most 1x1 pixels. Annotation only.
    pub pixel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractedUrls {
    pub loaded: Vec<LoadedUrl>,
    pub linkonly: Vec<Url>,
}

/// Extracts absolute URLs; relative references are dropped.
pub fn extract_urls(html: &str) -> ExtractedUrls {
    extract_urls_with_base(html, None)
}

/// Extracts URLs, resolving relative references against `base` when given.
pub fn extract_urls_with_base(html: &str, base: Option<&Url>) -> ExtractedUrls {
    let mut loaded = Vec::new();
    let mut linkonly = Vec::new();
    if html.trim().is_empty() {
        return ExtractedUrls::default();
    }
    let doc = Html::parse_document(html);
    for node in doc.root_element().descendants() {
        let Some(el) = ElementRef::wrap(node) else { continue };
        let v = el.value();
        let name = v.name();
        let mut push = |raw: Option<&str>, source: ResourceSource, pixel: bool| {
            if let Some(url) = raw.and_then(|r| resolve(r, base)) {
                loaded.push(LoadedUrl { url, source, pixel });
            }
        };
        match name {
            "img" => push(v.attr("src"), ResourceSource::Image, is_pixel(&el)),
            "source" => push(v.attr("src"), ResourceSource::Source, false),
            "input" => {
                if v.attr("type").is_some_and(|t| t.eq_ignore_ascii_case("image")) {
                    push(v.attr("src"), ResourceSource::InputImage, false);
                }
            }
            "link" => {
                let rel = v.attr("rel").unwrap_or("").to_ascii_lowercase();
                let mut tokens = rel.split_whitespace();
                if tokens.clone().any(|t| t == "stylesheet") {
                    push(v.attr("href"), ResourceSource::Stylesheet, false);
                } else if tokens.any(|t| t.contains("icon")) {
                    push(v.attr("href"), ResourceSource::Icon, false);
                }
            }
            "script" => push(v.attr("src"), ResourceSource::Script, false),
            "iframe" | "frame" => push(v.attr("src"), ResourceSource::Frame, false),
            "a" | "area" => {
                if let Some(url) = v.attr("href").and_then(|r| resolve(r, base)) {
                    linkonly.push(url);
                }
            }
            _ => {}
        }
        if let Some(bg) = v.attr("background") {
            push(Some(bg), ResourceSource::Background, false);
        }
        if let Some(style) = v.attr("style") {
            for raw in css_urls(style) {
                push(Some(raw), ResourceSource::CssUrl, false);
            }
        }
        if name == "style" {
            let css: String = el.text().collect();
            for raw in css_urls(&css) {
                push(Some(raw), ResourceSource::CssUrl, false);
            }
            for raw in css_imports(&css) {
                push(Some(raw), ResourceSource::Stylesheet, false);
            }
        }
    }
    ExtractedUrls { loaded, linkonly }
}

/// Only URLs that carry a host survive: `mailto:`, `tel:`, `cid:`, `data:`
/// and bare relative paths without a base are dropped. Network-path
/// references (`//host/x`) are taken as https.
fn resolve(raw: &str, base: Option<&Url>) -> Option<Url> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    let parsed = match Url::parse(raw) {
        Ok(u) => Some(u),
        Err(url::ParseError::RelativeUrlWithoutBase) => match base {
            Some(b) => b.join(raw).ok(),
            None if raw.starts_with("//") => Url::parse(&format!("https:{raw}")).ok(),
            None => None,
        },
        Err(_) => None,
    };
    parsed.filter(|u| u.host().is_some())
}

fn css_urls(css: &str) -> Vec<&str> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r#"(?i)url\(\s*(?:"([^"]*)"|'([^']*)'|([^)\s'"]*))\s*\)"#).expect("css url regex")
    });
    re.captures_iter(css)
        .filter_map(|c| c.get(1).or_else(|| c.get(2)).or_else(|| c.get(3)))
        .map(|m| m.as_str())
        .collect()
}

fn css_imports(css: &str) -> Vec<&str> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r#"(?i)@import\s+["']([^"']+)["']"#).expect("css import regex")
    });
    re.captures_iter(css)
        .filter_map(|c| c.get(1))
        .map(|m| m.as_str())
        .collect()
}

fn is_pixel(img: &ElementRef<'_>) -> bool {
    let dim = |name: &str| {
        img.value().attr(name).and_then(|v| {
            v.trim()
                .trim_end_matches("px")
                .trim()
                .parse::<f64>()
                .ok()
        })
    };
    match (dim("width"), dim("height")) {
        (None, None) => false,
        (w, h) => w.unwrap_or(0.0) <= 1.0 && h.unwrap_or(0.0) <= 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hosts(urls: &[Url]) -> Vec<String> {
        urls.iter().map(|u| u.host_str().unwrap().to_string()).collect()
    }

    fn loaded_hosts(x: &ExtractedUrls) -> Vec<String> {
        hosts(&x.loaded.iter().map(|l| l.url.clone()).collect::<Vec<_>>())
    }

    #[test]
    fn image_is_loaded() {
        let x = extract_urls(r#"<img src="http://stats.iroquois.fr/p.gif">"#);
        assert_eq!(loaded_hosts(&x), vec!["stats.iroquois.fr"]);
        assert!(x.linkonly.is_empty());
    }

    #[test]
    fn anchor_is_link_only() {
        let x = extract_urls(r#"<a href="https://twitter.com/x">t</a>"#);
        assert!(x.loaded.is_empty());
        assert_eq!(hosts(&x.linkonly), vec!["twitter.com"]);
    }

    #[test]
    fn empty_body() {
        assert_eq!(extract_urls(""), ExtractedUrls::default());
    }

    #[test]
    fn all_loaded_sources() {
        let html = r#"<html><head>
            <link rel="stylesheet" href="https://fonts.googleapis.com/css?family=Roboto">
            <link rel="shortcut icon" href="https://icons.example.org/f.ico">
            <link rel="canonical" href="https://canonical.example.org/">
            <style>@import "https://imp.example.net/a.css"; body { background: url('https://bg.example.net/b.png') }</style>
            <script src="https://cdn.example.com/t.js"></script>
            </head><body background="https://bodybg.example.com/x.jpg">
            <table><tr><td style="background-image: url(https://cell.example.com/c.png)">x</td></tr></table>
            <picture><source src="https://src.example.com/s.webp"></picture>
            <input type="image" src="https://btn.example.com/b.png">
            <input type="text" src="https://ignored.example.com/">
            <iframe src="https://frame.example.com/"></iframe>
            <map><area href="https://area.example.com/"></map>
            </body></html>"#;
        let x = extract_urls(html);
        let got: Vec<(String, ResourceSource)> = x
            .loaded
            .iter()
            .map(|l| (l.url.host_str().unwrap().to_string(), l.source))
            .collect();
        use ResourceSource::*;
        let want = vec![
            ("fonts.googleapis.com", Stylesheet),
            ("icons.example.org", Icon),
            ("bg.example.net", CssUrl),
            ("imp.example.net", Stylesheet),
            ("cdn.example.com", Script),
            ("bodybg.example.com", Background),
            ("cell.example.com", CssUrl),
            ("src.example.com", Source),
            ("btn.example.com", InputImage),
            ("frame.example.com", Frame),
        ];
        let want: Vec<(String, ResourceSource)> = want.into_iter().map(|(h, s)| (h.to_string(), s)).collect();
        assert_eq!(got, want);
        assert_eq!(hosts(&x.linkonly), vec!["area.example.com"]);
    }

    #[test]
    fn drops_relative_and_non_hierarchical() {
        let html = r#"<a href="mailto:x@caf.fr">m</a><a href="tel:+33">t</a>
            <img src="cid:logo@x"><img src="/local.png"><img src="data:image/png;base64,AAAA">
            <a href="javascript:void(0)">j</a>"#;
        assert_eq!(extract_urls(html), ExtractedUrls::default());
    }

    #[test]
    fn relative_resolves_with_base() {
        let base = Url::parse("https://www.laposte.fr/page/").unwrap();
        let x = extract_urls_with_base(r#"<img src="img/a.png"><a href="/b">b</a>"#, Some(&base));
        assert_eq!(x.loaded[0].url.as_str(), "https://www.laposte.fr/page/img/a.png");
        assert_eq!(x.linkonly[0].as_str(), "https://www.laposte.fr/b");
    }

    #[test]
    fn network_path_reference() {
        let x = extract_urls(r#"<link rel=stylesheet href="//fonts.googleapis.com/css">"#);
        assert_eq!(x.loaded[0].url.as_str(), "https://fonts.googleapis.com/css");
    }

    #[test]
    fn pixel_annotation() {
        let x = extract_urls(
            r#"<img src="http://t.example.com/o.gif" width="1" height="1">
               <img src="http://t.example.com/big.gif" width="600" height="1">
               <img src="http://t.example.com/nodim.gif">
               <img src="http://t.example.com/zero.gif" width="0px">"#,
        );
        let px: Vec<bool> = x.loaded.iter().map(|l| l.pixel).collect();
        assert_eq!(px, vec![true, false, false, true]);
    }

    #[test]
    fn malformed_markup_is_tolerated() {
        let x = extract_urls(r#"<div><img src="https://a.example.com/x.png"<p>unclosed <a href='https://b.example.com'>b"#);
        assert_eq!(hosts(&x.linkonly), vec!["b.example.com"]);
        assert!(x.loaded.is_empty() || loaded_hosts(&x) == vec!["a.example.com"]);
    }
}
