//! One check per acceptance criterion. Each returns a short summary on
//! success and the list of problems otherwise.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use bankscan::rules::RuleGroup;
use bankscan::tagging::{KeywordCatalog, SensitiveCategory};
use bankscan::taint::SinkCatalog;
use bankscan::taxonomy::{taxonomy_rows, types_for_row, Category, WeaknessType};
use bankscan::Scanner;

use super::{app, config, copy_app, key, keys, reach_oracle, scan, scan_with, set, taint_oracle, Key};

pub type Outcome = Result<String, Vec<String>>;
pub type Check = (&'static str, fn() -> Outcome);

fn finish(problems: Vec<String>, ok: String) -> Outcome {
    if problems.is_empty() {
        Ok(ok)
    } else {
        Err(problems)
    }
}

pub fn taxonomy_coverage() -> Outcome {
    let sinks = SinkCatalog::builtin();
    let rows = taxonomy_rows();
    let mut problems = Vec::new();
    for row in &rows {
        let covered = types_for_row(&row.id).iter().any(|t| {
            sinks.entries().iter().any(|s| s.weakness == *t) || RuleGroup::ALL.iter().any(|g| g.weaknesses().contains(t))
        });
        if !covered {
            problems.push(format!("row {} is not covered by any sink entry or rule group", row.id));
        }
    }
    if rows.len() != 22 {
        problems.push(format!("expected 22 taxonomy rows, found {}", rows.len()));
    }
    finish(problems, format!("{} rows covered", rows.len()))
}

pub fn case_study_expectations() -> Vec<(&'static str, BTreeSet<Key>)> {
    vec![
        ("prefs_login", set(&[("SharedPreference", "LoginActivity", "saveCredentials")])),
        (
            "update_trustall",
            set(&[
                ("SD Card", "UpdateChecker", "checkUpdate"),
                ("Invalid authentication: server verification", "UpdateChecker$TrustAllManager", "checkServerTrusted"),
            ]),
        ),
        (
            "crypto_util",
            set(&[
                ("Hard-coded Key", "CryptoUtil", "encrypt"),
                ("Improper AES: NoPadding", "CryptoUtil", "encrypt"),
                ("Improper AES: NoPadding", "CryptoUtil", "decrypt"),
            ]),
        ),
        ("screenshot_login", set(&[("Screenshot", "LoginActivity", "onCreate")])),
    ]
}

pub fn case_studies() -> Outcome {
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    for (name, want) in case_study_expectations() {
        let t = Instant::now();
        let r = scan(name);
        let took = t.elapsed();
        slowest = slowest.max(took);
        let got = keys(&r.findings);
        if got != want || r.findings.len() != want.len() {
            problems.push(format!("{name}: got {got:?}, want {want:?}"));
        }
        if took > Duration::from_secs(10) {
            problems.push(format!("{name}: took {took:?}"));
        }
    }
    finish(problems, format!("4 fixtures exact, slowest {} ms", slowest.as_millis()))
}

pub fn dead_code() -> Outcome {
    let c4 = |r: &bankscan::Report| r.findings.iter().filter(|f| f.category == Category::C4).cloned().collect::<Vec<_>>();
    let mut problems = Vec::new();
    let default = scan("update_deadtrust");
    if !c4(&default).is_empty() {
        problems.push(format!("default run reports C4: {:?}", keys(&c4(&default))));
    }
    let all = scan_with("update_deadtrust", |c| c.no_reachability = true);
    let got = c4(&all);
    if got.len() != 1 || got[0].weakness_type != WeaknessType::InvalidServerVerification {
        problems.push(format!("--no-reachability run reports {:?}", keys(&got)));
    }
    finish(problems, "0 C4 by default, 1 with --no-reachability".into())
}

pub const FP_IDENTIFIERS: [&str; 5] =
    ["login_fragement", "loginpager", "spinnerGender", "pkgname.txt", "KeyPermanentlyInvalidateException"];

pub fn tagging() -> Outcome {
    let mut problems = Vec::new();
    let cat = KeywordCatalog::builtin();
    let sizes: Vec<usize> = SensitiveCategory::ALL.iter().map(|&c| cat.count(c)).collect();
    if sizes != [13, 11, 24, 22] {
        problems.push(format!("catalog sizes {sizes:?}"));
    }
    let mut text = String::new();
    for e in walkdir::WalkDir::new(app("fp_identifiers")).into_iter().flatten().filter(|e| e.file_type().is_file()) {
        text.push_str(&std::fs::read_to_string(e.path()).unwrap_or_default());
    }
    for id in FP_IDENTIFIERS {
        if !text.contains(id) {
            problems.push(format!("fixture does not exercise {id}"));
        }
    }
    for strict in [false, true] {
        let r = scan_with("fp_identifiers", |c| c.strict_keys = strict);
        if !r.findings.is_empty() {
            problems.push(format!("strict_keys={strict}: {:?}", keys(&r.findings)));
        }
    }
    finish(problems, format!("sizes {sizes:?}, 0 findings on false-positive identifiers"))
}

pub const ORACLE_CASES: u64 = 40;

pub fn taint_oracle() -> Outcome {
    let mut problems = Vec::new();
    let (mut pairs, mut max_len) = (0, 0);
    for seed in 0..ORACLE_CASES {
        let p = taint_oracle::generate(seed);
        let n = p.instruction_count();
        max_len = max_len.max(n);
        if n > 200 {
            problems.push(format!("seed {seed}: {n} instructions"));
        }
        let (want, got) = (p.oracle(), p.engine());
        pairs += want.len();
        if want != got {
            problems.push(format!("seed {seed}: engine {got:?}, oracle {want:?}"));
        }
    }
    if pairs == 0 {
        problems.push("no generated program has a flow".into());
    }
    finish(problems, format!("{ORACLE_CASES} programs (<= {max_len} instructions), {pairs} flows agree"))
}

pub fn reach_oracle() -> Outcome {
    let mut problems = Vec::new();
    let mut reachable = 0;
    for seed in 0..ORACLE_CASES {
        let g = reach_oracle::generate(seed);
        reachable += g.expected().iter().filter(|e| e.path_exists && e.instantiated).count();
        problems.extend(g.check());
    }
    if reachable == 0 {
        problems.push("no reachable node in any graph".into());
    }
    finish(problems, format!("{ORACLE_CASES} graphs agree, {reachable} reachable nodes"))
}

pub const CORPUS_APPS: [&str; 6] =
    ["composite_bank", "prefs_login", "update_trustall", "crypto_util", "screenshot_login", "certs_bundle"];

pub fn determinism() -> Outcome {
    let mut problems = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    for a in CORPUS_APPS {
        copy_app(a, dir.path(), a);
    }
    let run = |jobs| {
        let mut c = config();
        c.jobs = jobs;
        Scanner::new(c).unwrap().scan_corpus(dir.path()).unwrap()
    };
    let (one, eight) = (run(1), run(8));
    if one.summary.to_json() != eight.summary.to_json() {
        problems.push("summary differs between jobs=1 and jobs=8".into());
    }
    for ((a, ra), (b, rb)) in one.reports.iter().zip(&eight.reports) {
        if a != b || ra.to_json() != rb.to_json() {
            problems.push(format!("report for {a} differs between job counts"));
        }
    }
    let scanner = Scanner::new(config()).unwrap();
    for a in CORPUS_APPS {
        let first = scanner.scan(&app(a)).unwrap().to_json();
        let second = scanner.scan(&app(a)).unwrap().to_json();
        if first != second {
            problems.push(format!("{a}: repeated scans differ"));
        }
    }
    finish(problems, format!("{} apps byte-identical across jobs=1/8 and reruns", CORPUS_APPS.len()))
}

pub fn composite_expectation() -> BTreeSet<Key> {
    set(&[
        ("Logging", "LoginActivity", "onSubmit"),
        ("SMS", "LoginActivity", "onSubmit"),
        ("Improper AES: ECB mode", "LoginActivity", "onSubmit"),
        ("Insecure SecureRandom", "Session", "init"),
    ])
}

/// Forward half: flows from tagged sources into catalog sinks. Backward
/// half: pattern hits whose site has an entry-point path. The reported set
/// must be exactly their union.
pub fn forward_backward_union() -> Outcome {
    let mut problems = Vec::new();
    let scanner = Scanner::new(config()).unwrap();
    let a = scanner.analyze(&app("composite_bank")).unwrap();
    let sinks = SinkCatalog::builtin();

    let mut forward = BTreeSet::new();
    for f in &a.flows {
        if !a.tagged.contains(&f.source) {
            problems.push(format!("flow from untagged source {}", f.source.view_id));
        }
        if !sinks.entries().contains(&f.sink) {
            problems.push(format!("flow into non-catalog sink {}", f.sink.method));
        }
        forward.insert(key(&bankscan::report::Finding::from_flow(f)));
    }

    let entries: BTreeSet<String> = a.entries.nodes().map(|n| a.call_graph.node(n).method.to_string()).collect();
    let mut backward = BTreeSet::new();
    for h in &a.rules.hits {
        let Some(reach) = &h.reachability else { continue };
        let path: Vec<&str> = reach.path.iter().map(|s| s.method.as_str()).collect();
        let starts_at_entry = path.first().is_some_and(|m| entries.contains(*m));
        let ends_at_site = path.last().is_some_and(|m| h.location.method.as_deref().is_some_and(|hm| m.ends_with(hm)));
        if !reach.reachable || !starts_at_entry || !ends_at_site {
            problems.push(format!("hit {:?} lacks an entry path: {path:?}", h.weakness));
        }
        backward.insert(key(&bankscan::report::Finding::from_hit(h)));
    }

    let union: BTreeSet<Key> = forward.union(&backward).cloned().collect();
    let reported = keys(&a.report.findings);
    if reported != union {
        problems.push(format!("reported {reported:?} != forward ∪ backward {union:?}"));
    }
    let want = composite_expectation();
    if reported != want {
        problems.push(format!("reported {reported:?}, expected {want:?}"));
    }
    let suppressed = keys(&a.report.suppressed);
    if suppressed != set(&[("Insecure hash function", "LegacyHasher", "digest")]) {
        problems.push(format!("suppressed {suppressed:?}"));
    }
    finish(problems, format!("{} forward + {} backward = {} findings", forward.len(), backward.len(), reported.len()))
}

pub fn all() -> Vec<Check> {
    vec![
        ("taxonomy coverage", taxonomy_coverage as fn() -> Outcome),
        ("case-study regression corpus", case_studies),
        ("dead-code suppression", dead_code),
        ("tagging regression", tagging),
        ("taint oracle equivalence", taint_oracle),
        ("reachability oracle equivalence", reach_oracle),
        ("determinism", determinism),
        ("forward and backward union", forward_backward_union),
    ]
}
