use proptest::prelude::*;
use trackaudit_core::domain::SuffixList;
use trackaudit_core::trackerdb::{EntityMap, TrackerDbError, BUNDLED_ENTITIES};

fn rd(host: &str) -> trackaudit_core::domain::RegistrableDomain {
    SuffixList::bundled().registrable_domain(host).unwrap()
}

#[test]
fn bundled_attributions() {
    let map = EntityMap::bundled();
    for (host, entity) in [
        ("doubleclick.net", "Google"),
        ("googleapis.com", "Google"),
        ("xiti.com", "Xiti"),
        ("facebook.com", "Facebook"),
        ("iroquois.fr", "Iroquois"),
        ("unlisted.example", "Autres"),
    ] {
        assert_eq!(map.attribute(&rd(host)), entity, "{host}");
    }
}

#[test]
fn reload_is_stable() {
    let a = EntityMap::parse(BUNDLED_ENTITIES).unwrap();
    let b = EntityMap::parse(BUNDLED_ENTITIES).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("entities.csv");
    std::fs::write(&path, BUNDLED_ENTITIES).unwrap();
    assert_eq!(format!("{:?}", EntityMap::from_file(&path).unwrap()), format!("{a:?}"));
}

#[test]
fn load_errors() {
    assert!(matches!(EntityMap::parse("pattern,entity\na.com,A\na.com,B\n"), Err(TrackerDbError::DuplicatePattern(_))));
    assert!(matches!(EntityMap::parse("pattern,entity\nnot a domain!,A\n"), Err(TrackerDbError::BadPattern { .. })));
    let empty = EntityMap::parse("").unwrap();
    assert!(empty.rules().is_empty());
    assert_eq!(empty.attribute(&rd("google.com")), "Autres");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disjoint_rule_order_is_irrelevant(
        names in prop::collection::btree_set("[a-z]{3,8}", 1..12),
        seed in any::<u64>(),
        probe in "[a-z]{3,8}",
    ) {
        let rows: Vec<String> = names.iter().enumerate().map(|(i, n)| format!("{n}.com,E{}", i % 3)).collect();
        let mut shuffled = rows.clone();
        let len = shuffled.len();
        for i in (1..len).rev() {
            let j = (seed.rotate_left(i as u32) as usize) % (i + 1);
            shuffled.swap(i, j);
        }
        let a = EntityMap::parse(&format!("pattern,entity\n{}\n", rows.join("\n"))).unwrap();
        let b = EntityMap::parse(&format!("pattern,entity\n{}\n", shuffled.join("\n"))).unwrap();
        for host in names.iter().map(|n| format!("www.{n}.com")).chain([format!("{probe}.com"), format!("{probe}.net")]) {
            prop_assert_eq!(a.attribute_host(&host), b.attribute_host(&host));
        }
    }
}
