use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::taxonomy::WeaknessType;

use super::format::{grid, where_};
use super::{AppMeta, Finding, Report};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffRow {
    pub weakness_type: WeaknessType,
    pub patched: usize,
    pub new: usize,
}

/// Findings fixed and introduced between two versions of an app.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub old: AppMeta,
    pub new: AppMeta,
    /// In the old report only.
    pub patched: Vec<Finding>,
    /// In the new report only.
    pub introduced: Vec<Finding>,
    pub unchanged: usize,
    pub by_type: Vec<DiffRow>,
}

/// Line numbers and smali paths shift between builds, so findings are
/// matched on type and class/method (or package file).
fn match_key(f: &Finding) -> (WeaknessType, String, String) {
    let l = &f.location;
    if l.class.is_empty() {
        (f.weakness_type, l.file.clone(), String::new())
    } else {
        (f.weakness_type, l.class.clone(), l.method.clone().unwrap_or_default())
    }
}

type Index<'a> = BTreeMap<(WeaknessType, String, String), &'a Finding>;

fn index(r: &Report) -> Index<'_> {
    let mut m = Index::new();
    for f in &r.findings {
        m.entry(match_key(f)).or_insert(f);
    }
    m
}

pub fn diff_reports(old: &Report, new: &Report) -> ReportDiff {
    let (a, b) = (index(old), index(new));
    let patched: Vec<Finding> = a.iter().filter(|(k, _)| !b.contains_key(*k)).map(|(_, f)| (*f).clone()).collect();
    let introduced: Vec<Finding> = b.iter().filter(|(k, _)| !a.contains_key(*k)).map(|(_, f)| (*f).clone()).collect();
    let unchanged = a.keys().filter(|k| b.contains_key(*k)).count();
    let mut rows: BTreeMap<WeaknessType, (usize, usize)> = BTreeMap::new();
    for f in &patched {
        rows.entry(f.weakness_type).or_default().0 += 1;
    }
    for f in &introduced {
        rows.entry(f.weakness_type).or_default().1 += 1;
    }
    ReportDiff {
        old: old.app.clone(),
        new: new.app.clone(),
        patched,
        introduced,
        unchanged,
        by_type: rows.into_iter().map(|(w, (p, n))| DiffRow { weakness_type: w, patched: p, new: n }).collect(),
    }
}

impl ReportDiff {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("diff serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let v = |m: &AppMeta| m.version_name.clone().unwrap_or_else(|| m.name.clone());
        let mut out = format!("{} {} -> {}\n", self.new.package, v(&self.old), v(&self.new));
        let rows: Vec<Vec<String>> = self
            .by_type
            .iter()
            .map(|r| vec![r.weakness_type.name().to_string(), r.patched.to_string(), r.new.to_string()])
            .collect();
        out.push_str(&grid(&["Weakness type", "#Patched", "#New"], &rows));
        let _ = writeln!(out, "{} unchanged", self.unchanged);
        for f in &self.patched {
            let _ = writeln!(out, "- {} {}", f.weakness_type.name(), where_(f));
        }
        for f in &self.introduced {
            let _ = writeln!(out, "+ {} {}", f.weakness_type.name(), where_(f));
        }
        out
    }
}
