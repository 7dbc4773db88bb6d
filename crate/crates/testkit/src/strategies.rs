//! proptest generators.

use std::sync::Arc;

use proptest::prelude::*;
use trackaudit_core::domain::{Rule, RuleKind};

/// A DNS label: lowercase letters and digits, inner hyphens allowed.
pub fn label() -> impl Strategy<Value = String> {
    "[a-z0-9]([a-z0-9-]{0,8}[a-z0-9])?"
}

/// Hosts that end in a real suffix rule most of the time, with up to three
/// extra labels in front and occasional case and trailing-dot noise.
pub fn host_from_rules(rules: Arc<Vec<Rule>>) -> impl Strategy<Value = String> {
    let n = rules.len();
    let ruled = (0..n, prop::collection::vec(label(), 0..=3), label()).prop_map(move |(i, prefix, star)| {
        let rule = &rules[i];
        let base = match rule.kind {
            RuleKind::Wildcard => format!("{star}.{}", rule.name),
            _ => rule.name.clone(),
        };
        let mut parts = prefix;
        parts.push(base);
        parts.join(".")
    });
    let random = prop::collection::vec(label(), 1..=4).prop_map(|v| v.join("."));
    (prop_oneof![4 => ruled, 1 => random], any::<bool>(), any::<bool>()).prop_map(|(h, upper, dot)| {
        let h = if upper { h.to_ascii_uppercase() } else { h };
        if dot {
            format!("{h}.")
        } else {
            h
        }
    })
}

/// Arbitrary URL tail: path, optional query, optional fragment.
pub fn url_tail() -> impl Strategy<Value = String> {
    (
        prop::collection::vec("[A-Za-z0-9._~-]{1,10}", 0..4),
        prop::option::of("[a-z]{1,5}=[A-Za-z0-9]{0,8}"),
        prop::option::of("[A-Za-z0-9]{0,8}"),
    )
        .prop_map(|(segs, q, f)| {
            let mut s = format!("/{}", segs.join("/"));
            if let Some(q) = q {
                s.push('?');
                s.push_str(&q);
            }
            if let Some(f) = f {
                s.push('#');
                s.push_str(&f);
            }
            s
        })
}

/// Dotted Java-style class names: two to five labels.
pub fn class_name() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z]{1,4}", 2..=5).prop_map(|v| v.join("."))
}
