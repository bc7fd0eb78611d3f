mod common;

use bankscan::rules::RuleGroup;
use bankscan::taint::SinkCatalog;
use bankscan::taxonomy::{taxonomy_rows, types_for_row, Category, WeaknessType};

#[test]
fn every_row_is_covered() {
    if let Err(p) = common::criteria::taxonomy_coverage() {
        panic!("uncovered rows: {p:#?}");
    }
}

#[test]
fn every_type_has_a_detector() {
    let sinks = SinkCatalog::builtin();
    for t in WeaknessType::ALL {
        let by_sink = sinks.entries().iter().any(|s| s.weakness == *t);
        let by_rule = RuleGroup::ALL.iter().any(|g| g.weaknesses().contains(t));
        assert!(by_sink || by_rule, "{t:?}");
    }
}

#[test]
fn rows_partition_types() {
    let rows = taxonomy_rows();
    let total: usize = rows.iter().map(|r| types_for_row(&r.id).len()).sum();
    assert_eq!(total, WeaknessType::ALL.len());
    let c4: Vec<_> = rows.iter().filter(|r| r.category == Category::C4).collect();
    assert_eq!(c4.len(), 12);
}

#[test]
fn sink_categories_match_types() {
    for s in SinkCatalog::builtin().entries() {
        assert_ne!(s.weakness.category(), Category::C4, "{} is a communication weakness", s.method);
    }
}
