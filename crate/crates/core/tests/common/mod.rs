//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod criteria;
pub mod reach_oracle;
pub mod taint_oracle;

use std::collections::BTreeSet;
use std::path::PathBuf;

use bankscan::report::Finding;
use bankscan::scan::parse_date;
use bankscan::{Report, ScanConfig, Scanner};

pub const REFERENCE_DATE: &str = "2024-01-01";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn app(name: &str) -> PathBuf {
    fixtures().join("apps").join(name)
}

pub fn config() -> ScanConfig {
    ScanConfig { reference_date: parse_date(REFERENCE_DATE).unwrap(), ..ScanConfig::default() }
}

pub fn scan_with(name: &str, tweak: impl FnOnce(&mut ScanConfig)) -> Report {
    let mut c = config();
    tweak(&mut c);
    Scanner::new(c).unwrap().scan(&app(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn scan(name: &str) -> Report {
    scan_with(name, |_| {})
}

/// (type, simple class name, method name); file path for package files.
pub type Key = (String, String, String);

pub fn key(f: &Finding) -> Key {
    let l = &f.location;
    if l.class.is_empty() {
        return (f.weakness_type.name().to_string(), l.file.clone(), String::new());
    }
    let class = l.class.trim_start_matches('L').trim_end_matches(';');
    let class = class.rsplit('/').next().unwrap_or(class).to_string();
    let method = l.method.as_deref().and_then(|m| m.split('(').next()).unwrap_or("").to_string();
    (f.weakness_type.name().to_string(), class, method)
}

pub fn keys(findings: &[Finding]) -> BTreeSet<Key> {
    findings.iter().map(key).collect()
}

pub fn set(items: &[(&str, &str, &str)]) -> BTreeSet<Key> {
    items.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect()
}

/// Copies a fixture app into `dir` under a new name.
pub fn copy_app(name: &str, dir: &std::path::Path, as_name: &str) -> PathBuf {
    let src = app(name);
    let dst = dir.join(as_name);
    for e in walkdir::WalkDir::new(&src) {
        let e = e.unwrap();
        let rel = e.path().strip_prefix(&src).unwrap();
        let target = dst.join(rel);
        if e.file_type().is_dir() {
            std::fs::create_dir_all(&target).unwrap();
        } else {
            std::fs::copy(e.path(), &target).unwrap();
        }
    }
    dst
}
