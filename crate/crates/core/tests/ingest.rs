mod common;

use std::collections::BTreeSet;

use common::clique_pairs;
use proptest::prelude::*;
use sna_core::build_graph;
use sna_core::ingest::{apply_aliases, clique_expand, parse_articles, write_articles, AliasMap, ArticleRecord};

fn person(i: usize) -> String {
    format!("Person {i}")
}

fn arb_records() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..25, 0..6), 1..40)
}

fn records_of(raw: &[Vec<usize>]) -> Vec<ArticleRecord> {
    raw.iter()
        .enumerate()
        .map(|(i, ps)| ArticleRecord::new(format!("a{i}"), ps.iter().map(|&p| person(p))))
        .collect()
}

proptest! {
    #[test]
    fn clique_has_k_choose_2_pairs(k in 0usize..=50) {
        let rec = ArticleRecord::new("a", (0..k).map(person));
        let pairs = clique_expand(std::slice::from_ref(&rec));
        prop_assert_eq!(pairs.len(), k * k.saturating_sub(1) / 2);
        let got: BTreeSet<(String, String)> = pairs
            .iter()
            .map(|&(a, b)| if a < b { (a.to_owned(), b.to_owned()) } else { (b.to_owned(), a.to_owned()) })
            .collect();
        prop_assert_eq!(got, clique_pairs(&rec.persons));
    }

    #[test]
    fn alias_application_is_idempotent(raw in arb_records(), links in prop::collection::vec((0usize..25, 0usize..25), 0..10)) {
        // keep alias pairs acyclic: an alias always points to a larger index,
        // and no canonical name is also used as an alias
        let mut seen_alias = BTreeSet::new();
        let pairs: Vec<(String, String)> = links
            .into_iter()
            .filter(|(a, c)| a < c)
            .filter(|(a, _)| seen_alias.insert(*a))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|(_, c)| !seen_alias.contains(c))
            .map(|(a, c)| (person(a), person(c)))
            .collect();
        let map = AliasMap::new(pairs.iter().map(|(a, c)| (a.as_str(), c.as_str()))).unwrap();
        let once = apply_aliases(records_of(&raw), &map);
        let twice = apply_aliases(once.clone(), &map);
        prop_assert_eq!(&once, &twice);
        for r in &once {
            for p in &r.persons {
                prop_assert!(!map.is_alias(p));
            }
            let distinct: BTreeSet<&String> = r.persons.iter().collect();
            prop_assert_eq!(distinct.len(), r.persons.len());
        }
    }

    #[test]
    fn nodes_are_persons_with_partners(raw in arb_records()) {
        let records = records_of(&raw);
        let mut expected = BTreeSet::new();
        for r in &records {
            let distinct: BTreeSet<&String> = r.persons.iter().collect();
            if distinct.len() >= 2 {
                expected.extend(distinct.into_iter().cloned());
            }
        }
        match build_graph(clique_expand(&records)) {
            Ok(g) => {
                let got: BTreeSet<String> = g.names().iter().cloned().collect();
                prop_assert_eq!(got, expected);
            }
            Err(_) => prop_assert!(expected.is_empty()),
        }
    }

    #[test]
    fn jsonl_round_trip(raw in arb_records()) {
        let records = records_of(&raw);
        let mut buf = Vec::new();
        write_articles(&records, &mut buf).unwrap();
        let parsed = parse_articles(buf.as_slice()).unwrap();
        let kept: Vec<ArticleRecord> = records.into_iter().filter(|r| !r.persons.is_empty()).collect();
        prop_assert_eq!(parsed.records, kept);
    }
}

#[test]
fn alias_cycle_is_rejected() {
    assert!(AliasMap::new([("A", "B"), ("B", "A")]).is_err());
}

#[test]
fn names_are_normalized_before_matching() {
    let composed = "Jos\u{e9}  Ivanov";
    let decomposed = "Jose\u{301} Ivanov";
    let rec = ArticleRecord::new("a", [composed, decomposed, " Petrov "]);
    assert_eq!(rec.persons, vec!["Jos\u{e9} Ivanov".to_owned(), "Petrov".to_owned()]);
}
