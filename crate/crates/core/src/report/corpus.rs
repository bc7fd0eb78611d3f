use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::taxonomy::{Category, WeaknessType};

use super::format::grid;
use super::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppStatus {
    Scanned,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub status: AppStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<String>,
    pub findings: usize,
    pub weakness_types: Vec<WeaknessType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

impl CorpusEntry {
    pub fn scanned(name: &str, report: &Report) -> CorpusEntry {
        CorpusEntry {
            name: name.to_string(),
            status: AppStatus::Scanned,
            package: Some(report.app.package.clone()),
            findings: report.findings.len(),
            weakness_types: report.weakness_types().into_iter().collect(),
            error: None,
            duration_ms: report.scan.duration_ms,
        }
    }

    pub fn failed(name: &str, error: impl ToString) -> CorpusEntry {
        CorpusEntry {
            name: name.to_string(),
            status: AppStatus::Failed,
            package: None,
            findings: 0,
            weakness_types: Vec::new(),
            error: Some(error.to_string()),
            duration_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffectedRow {
    pub weakness_type: WeaknessType,
    pub category: Category,
    pub affected_apps: usize,
}

/// Per-type affected-app counts over a batch of scans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub apps_total: usize,
    pub apps_scanned: usize,
    pub apps_failed: usize,
    pub total_findings: usize,
    pub affected: Vec<AffectedRow>,
    pub apps: Vec<CorpusEntry>,
}

impl CorpusSummary {
    pub fn from_entries(mut apps: Vec<CorpusEntry>) -> CorpusSummary {
        apps.sort_by(|a, b| a.name.cmp(&b.name));
        let mut counts: BTreeMap<WeaknessType, usize> = BTreeMap::new();
        for a in &apps {
            for w in a.weakness_types.iter().collect::<BTreeSet<_>>() {
                *counts.entry(*w).or_default() += 1;
            }
        }
        let mut affected: Vec<AffectedRow> = counts
            .into_iter()
            .map(|(w, n)| AffectedRow { weakness_type: w, category: w.category(), affected_apps: n })
            .collect();
        affected.sort_by_key(|r| (r.category, r.weakness_type));
        let apps_failed = apps.iter().filter(|a| a.status == AppStatus::Failed).count();
        CorpusSummary {
            apps_total: apps.len(),
            apps_scanned: apps.len() - apps_failed,
            apps_failed,
            total_findings: apps.iter().map(|a| a.findings).sum(),
            affected,
            apps,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .affected
            .iter()
            .map(|r| vec![r.category.to_string(), r.weakness_type.name().to_string(), r.affected_apps.to_string()])
            .collect();
        let mut out = grid(&["Category", "Weakness type", "#Affected apps"], &rows);
        let _ = writeln!(
            out,
            "{} apps, {} scanned, {} failed, {} findings",
            self.apps_total, self.apps_scanned, self.apps_failed, self.total_findings
        );
        for a in self.apps.iter().filter(|a| a.status == AppStatus::Failed) {
            let _ = writeln!(out, "failed: {}: {}", a.name, a.error.as_deref().unwrap_or(""));
        }
        out
    }
}
