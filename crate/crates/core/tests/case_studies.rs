mod common;

use bankscan::report::{diff_reports, Confidence, Evidence};
use bankscan::taxonomy::{Category, WeaknessType};
use bankscan::Report;
use common::criteria;
use common::{keys, scan, scan_with, set};

fn only(r: &Report, t: WeaknessType) -> &bankscan::report::Finding {
    let v: Vec<_> = r.findings.iter().filter(|f| f.weakness_type == t).collect();
    assert_eq!(v.len(), 1, "{t:?} in {:?}", keys(&r.findings));
    v[0]
}

#[test]
fn case_studies_exact() {
    if let Err(p) = criteria::case_studies() {
        panic!("{p:#?}");
    }
}

#[test]
fn preference_leak_merges_both_puts() {
    let r = scan("prefs_login");
    let f = only(&r, WeaknessType::SharedPreference);
    assert_eq!(f.occurrences, 2);
    let Evidence::Flow(e) = &f.evidence else { panic!("not a flow") };
    // evidence is the first put, the user name
    assert_eq!(e.source_category.to_string(), "Identity");
    assert!(e.sink_api.contains("putString"));
}

#[test]
fn update_download_reaches_sd_card() {
    let r = scan("update_trustall");
    let sd = only(&r, WeaknessType::SdCard);
    let Evidence::Flow(e) = &sd.evidence else { panic!("not a flow") };
    assert_eq!(e.view_id, "edit_phone");
    let tls = only(&r, WeaknessType::InvalidServerVerification);
    assert_eq!(tls.category, Category::C4);
    let Evidence::Pattern(p) = &tls.evidence else { panic!("not a pattern") };
    assert_eq!(p.reachable, Some(true));
    assert!(!p.entry_path.is_empty());
}

#[test]
fn hardcoded_key_and_nopadding() {
    let r = scan("crypto_util");
    assert_eq!(only(&r, WeaknessType::HardcodedKey).occurrences, 2);
    let nopad: Vec<_> = r.findings.iter().filter(|f| f.weakness_type == WeaknessType::AesNoPadding).collect();
    assert_eq!(nopad.len(), 2);
    // OAEP in KeyExchange is not flagged
    assert!(r.findings.iter().all(|f| f.weakness_type != WeaknessType::RsaImproperPadding));
}

#[test]
fn strict_keys_only_adds_key_findings() {
    let r = scan_with("crypto_util", |c| c.strict_keys = true);
    let extra: Vec<_> = keys(&r.findings).difference(&keys(&scan("crypto_util").findings)).cloned().collect();
    assert!(extra.iter().all(|k| k.0 == "Hard-coded Key"), "{extra:?}");
}

#[test]
fn screenshot_names_sensitive_views() {
    let r = scan("screenshot_login");
    let Evidence::Pattern(p) = &only(&r, WeaknessType::Screenshot).evidence else { panic!() };
    assert!(p.detail.contains("et_secret") && p.detail.contains("et_sms"), "{}", p.detail);
    assert!(!p.detail.contains("et_user"));
}

#[test]
fn dead_trust_manager_is_suppressed() {
    if let Err(p) = criteria::dead_code() {
        panic!("{p:#?}");
    }
    let default = scan("update_deadtrust");
    assert_eq!(keys(&default.suppressed), set(&[("Invalid authentication: server verification", "UpdateChecker$TrustAllManager", "checkServerTrusted")]));
    let all = scan_with("update_deadtrust", |c| c.no_reachability = true);
    let f = only(&all, WeaknessType::InvalidServerVerification);
    assert_eq!(f.confidence, Confidence::Indeterminate);
    assert!(all.suppressed.is_empty());
}

#[test]
fn composite_algorithm_halves() {
    if let Err(p) = criteria::forward_backward_union() {
        panic!("{p:#?}");
    }
}

#[test]
fn certificate_bundle() {
    let r = scan("certs_bundle");
    assert_eq!(
        keys(&r.findings),
        set(&[
            ("Invalid certificate: expired", "assets/expired.pem", ""),
            ("Invalid certificate: SHA-1", "res/raw/legacy.cer", ""),
            ("Hard-coded Key", "assets/client_key.pem", ""),
        ])
    );
    // before the expiry date the certificate is fine
    let early = scan_with("certs_bundle", |c| c.reference_date = bankscan::scan::parse_date("2016-06-01").unwrap());
    assert!(early.findings.iter().all(|f| f.weakness_type != WeaknessType::CertificateExpired));
}

#[test]
fn false_positive_identifiers() {
    if let Err(p) = criteria::tagging() {
        panic!("{p:#?}");
    }
}

#[test]
fn version_diff() {
    let cfg = common::config();
    let scanner = bankscan::Scanner::new(cfg).unwrap();
    let dir = common::fixtures().join("versions");
    let old = scanner.scan(&dir.join("ismsbank_5.0")).unwrap();
    let new = scanner.scan(&dir.join("ismsbank_5.2")).unwrap();
    let d = diff_reports(&old, &new);
    assert_eq!(keys(&d.patched), set(&[("Invalid authentication: server verification", "UpdateChecker$TrustAllManager", "checkServerTrusted")]));
    assert_eq!(keys(&d.introduced), set(&[("Logging", "MainActivity", "onCreate")]));
    assert_eq!(d.unchanged, 1);
    assert!(d.to_text().contains("5.0 -> 5.2"));
}

