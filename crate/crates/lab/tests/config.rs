use std::collections::BTreeMap;

use nslab::config::{parse_file, schema, ResolvedConfig, SUBCOMMANDS};
use nslab::LabError;
use proptest::prelude::*;

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn every_subcommand_has_defaults() {
    for sub in SUBCOMMANDS {
        assert!(schema(sub).is_some(), "{sub}");
        ResolvedConfig::resolve(sub, &BTreeMap::new(), &BTreeMap::new()).unwrap();
    }
    assert!(schema("nope").is_none());
}

#[test]
fn flags_override_file() {
    let file = parse_file("N = 64\nseed = 3\n").unwrap();
    let cfg = ResolvedConfig::resolve("example", &file, &map(&[("N", "16")])).unwrap();
    assert_eq!(cfg.usize("N").unwrap(), 16);
    assert_eq!(cfg.usize("seed").unwrap(), 3);
    assert_eq!(cfg.usize("N0").unwrap(), 2);
}

#[test]
fn lists_and_infinity() {
    let file = parse_file("N = [16, 32]\n").unwrap();
    let cfg = ResolvedConfig::resolve("scan", &file, &BTreeMap::new()).unwrap();
    assert_eq!(cfg.usize_list("N").unwrap(), vec![16, 32]);
    let cfg = ResolvedConfig::resolve("scan", &BTreeMap::new(), &map(&[("N", "8,16")])).unwrap();
    assert_eq!(cfg.usize_list("N").unwrap(), vec![8, 16]);
    let cfg = ResolvedConfig::resolve("besov", &BTreeMap::new(), &map(&[("p", "inf")])).unwrap();
    assert_eq!(cfg.f64("p").unwrap(), f64::INFINITY);
}

#[test]
fn rejects_unknown_and_malformed() {
    let e = ResolvedConfig::resolve("example", &map(&[("bogus", "1")]), &BTreeMap::new()).unwrap_err();
    assert!(matches!(e, LabError::Config(_)));
    assert!(ResolvedConfig::resolve("example", &BTreeMap::new(), &map(&[("N", "x")])).is_err());
    assert!(ResolvedConfig::resolve("pipeline", &BTreeMap::new(), &map(&[("coupling", "both")])).is_err());
    assert!(parse_file("[table]\nN = 1\n").is_err());
}

#[test]
fn hash_ignores_source_of_values() {
    let a = ResolvedConfig::resolve("example", &parse_file("N = 16").unwrap(), &BTreeMap::new()).unwrap();
    let b = ResolvedConfig::resolve("example", &BTreeMap::new(), &map(&[("N", "16")])).unwrap();
    let c = ResolvedConfig::resolve("example", &BTreeMap::new(), &map(&[("N", "32")])).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

proptest! {
    #[test]
    fn seed_roundtrips(seed in 0u64..1 << 50) {
        let cfg = ResolvedConfig::resolve("example", &BTreeMap::new(), &map(&[("seed", &seed.to_string())])).unwrap();
        prop_assert_eq!(cfg.usize("seed").unwrap() as u64, seed);
    }
}
