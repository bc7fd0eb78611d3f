mod common;

#[test]
fn corpus_and_single_scans_are_byte_identical() {
    if let Err(p) = common::criteria::determinism() {
        panic!("{p:#?}");
    }
}

#[test]
fn timing_is_opt_in() {
    let plain = common::scan("prefs_login");
    assert!(plain.scan.duration_ms.is_none());
    let timed = common::scan_with("prefs_login", |c| c.timing = true);
    assert!(timed.scan.duration_ms.is_some());
}
