//! Findings: taint flows and pattern hits merged into one deduplicated,
//! canonically ordered weakness set per app.

mod corpus;
mod diff;
mod format;

pub use corpus::{AffectedRow, AppStatus, CorpusEntry, CorpusSummary};
pub use diff::{diff_reports, DiffRow, ReportDiff};
pub use format::{render, OutputFormat};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Diagnostic;
use crate::rules::{Advisory, Location, PatternHit, RuleOutcome};
use crate::tagging::SensitiveCategory;
use crate::taint::FlowPath;
use crate::taxonomy::{Adversary, Category, SeverityTier, WeaknessType};

pub const REPORT_FORMAT: &str = "bankscan-report/1";
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Confirmed,
    /// Reported only because the reachability filter was off.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowEvidence {
    pub keyword: String,
    pub source_category: SensitiveCategory,
    pub view_id: String,
    pub source: Location,
    /// `Lclass;->name` of the sink API.
    pub sink_api: String,
    pub steps: Vec<String>,
    pub crosses_components: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternEvidence {
    pub rule: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entry_path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Flow(FlowEvidence),
    Pattern(PatternEvidence),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub weakness_type: WeaknessType,
    /// Taxonomy row id.
    pub row: String,
    pub category: Category,
    pub adversary: Adversary,
    pub tier: SeverityTier,
    pub confidence: Confidence,
    pub location: Location,
    pub evidence: Evidence,
    /// Merged duplicates at the same method, including this one.
    pub occurrences: usize,
}

impl Finding {
    fn new(weakness: WeaknessType, confidence: Confidence, location: Location, evidence: Evidence) -> Finding {
        Finding {
            weakness_type: weakness,
            row: weakness.row().to_string(),
            category: weakness.category(),
            adversary: weakness.adversary(),
            tier: weakness.tier(),
            confidence,
            location,
            evidence,
            occurrences: 1,
        }
    }

    pub fn from_flow(f: &FlowPath) -> Finding {
        let sink_line = &f.sink_line;
        let source = Location::at(&f.source.binding_site, &f.source.method);
        let steps = f
            .steps
            .iter()
            .map(|s| match &s.line {
                Some(l) => format!("{} [{}] line {}", s.method, s.carrier, l.java_line.unwrap_or(l.line)),
                None => format!("{} [{}]", s.method, s.carrier),
            })
            .collect();
        Finding::new(
            f.weakness(),
            Confidence::Confirmed,
            Location::at(sink_line, &f.sink_method),
            Evidence::Flow(FlowEvidence {
                keyword: f.source.keyword.clone(),
                source_category: f.source.category,
                view_id: f.source.view_id.clone(),
                source,
                sink_api: format!("{}->{}", f.sink.class, f.sink.method),
                steps,
                crosses_components: f.crosses_components,
            }),
        )
    }

    pub fn from_hit(h: &PatternHit) -> Finding {
        let reachable = h.reachability.as_ref().map(|r| r.reachable);
        let confidence = if reachable == Some(false) { Confidence::Indeterminate } else { Confidence::Confirmed };
        let entry_path = h
            .reachability
            .as_ref()
            .map(|r| r.path.iter().map(|s| s.method.clone()).collect())
            .unwrap_or_default();
        Finding::new(
            h.weakness,
            confidence,
            h.location.clone(),
            Evidence::Pattern(PatternEvidence {
                rule: h.group.id().to_string(),
                detail: h.evidence.clone(),
                reachable,
                entry_path,
            }),
        )
    }

    /// Findings at the same method (or file) with the same type are one.
    pub fn dedup_key(&self) -> (WeaknessType, &str, &str, Option<&str>) {
        (self.weakness_type, &self.location.file, &self.location.class, self.location.method.as_deref())
    }

    fn sort_key(&self) -> (Category, WeaknessType, &Location, &Evidence) {
        (self.category, self.weakness_type, &self.location, &self.evidence)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppMeta {
    /// Directory name of the unpacked app.
    pub name: String,
    pub package: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_code: Option<String>,
}

/// Where a catalog came from and how big it is.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogInfo {
    pub origin: String,
    pub entries: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub tool_version: String,
    pub keywords: CatalogInfo,
    pub sinks: CatalogInfo,
    pub rules: String,
    pub no_reachability: bool,
    pub strict_keys: bool,
    pub reference_date: String,
    /// Set when the taint budget ran out; findings may be incomplete.
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub by_category: BTreeMap<Category, usize>,
    pub by_type: BTreeMap<String, usize>,
}

impl Summary {
    pub fn of(findings: &[Finding]) -> Summary {
        let mut s = Summary { total: findings.len(), ..Default::default() };
        for f in findings {
            *s.by_category.entry(f.category).or_default() += 1;
            *s.by_type.entry(f.weakness_type.name().to_string()).or_default() += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub app: AppMeta,
    pub scan: ScanMeta,
    pub summary: Summary,
    pub findings: Vec<Finding>,
    /// Pattern hits dropped because no entry point reaches them.
    pub suppressed: Vec<Finding>,
    pub advisories: Vec<Advisory>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::error::Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn weakness_types(&self) -> std::collections::BTreeSet<WeaknessType> {
        self.findings.iter().map(|f| f.weakness_type).collect()
    }
}

/// Deduplicates and orders findings. Among duplicates the first in canonical
/// order is kept and the rest are counted in `occurrences`.
pub fn canonicalize(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut index: BTreeMap<(WeaknessType, String, String, Option<String>), usize> = BTreeMap::new();
    let mut out: Vec<Finding> = Vec::new();
    for f in findings {
        let (t, file, class, method) = f.dedup_key();
        let key = (t, file.to_string(), class.to_string(), method.map(str::to_string));
        match index.get(&key) {
            Some(&k) => {
                out[k].occurrences += f.occurrences;
                if f.confidence < out[k].confidence {
                    out[k].confidence = f.confidence;
                }
            }
            None => {
                index.insert(key, out.len());
                out.push(f);
            }
        }
    }
    out
}

/// The weakness set of one app: every sink-reaching flow plus every
/// surviving pattern hit.
pub fn assemble(
    flows: &[FlowPath],
    rules: &RuleOutcome,
    app: AppMeta,
    scan: ScanMeta,
    mut diagnostics: Vec<Diagnostic>,
) -> Report {
    let mut findings: Vec<Finding> = flows.iter().map(Finding::from_flow).collect();
    findings.extend(rules.hits.iter().map(Finding::from_hit));
    let findings = canonicalize(findings);
    let suppressed = canonicalize(rules.suppressed.iter().map(Finding::from_hit).collect());
    let mut advisories = rules.advisories.clone();
    advisories.sort();
    advisories.dedup();
    diagnostics.sort();
    diagnostics.dedup();
    Report {
        format: REPORT_FORMAT.to_string(),
        app,
        scan,
        summary: Summary::of(&findings),
        findings,
        suppressed,
        advisories,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::RuleGroup;

    fn hit(w: WeaknessType, method: &str, line: u32) -> PatternHit {
        PatternHit {
            group: RuleGroup::AesImproper,
            weakness: w,
            location: Location {
                file: "smali/com/b/C.smali".into(),
                class: "Lcom/b/C;".into(),
                method: Some(method.into()),
                line: Some(line),
            },
            evidence: "Cipher.getInstance(\"AES/ECB/NoPadding\")".into(),
            reachability: None,
            site: None,
        }
    }

    #[test]
    fn duplicate_hits_merge() {
        let rules = RuleOutcome {
            hits: vec![hit(WeaknessType::AesEcbMode, "a()V", 9), hit(WeaknessType::AesEcbMode, "a()V", 4)],
            ..Default::default()
        };
        let r = assemble(&[], &rules, AppMeta::default(), ScanMeta::default(), vec![]);
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].occurrences, 2);
        assert_eq!(r.findings[0].location.line, Some(4));
    }

    #[test]
    fn ordering_and_counts() {
        let rules = RuleOutcome {
            hits: vec![
                hit(WeaknessType::InsecureHash, "h()V", 1),
                hit(WeaknessType::AesEcbMode, "b()V", 1),
                hit(WeaknessType::AesEcbMode, "a()V", 1),
            ],
            ..Default::default()
        };
        let r = assemble(&[], &rules, AppMeta::default(), ScanMeta::default(), vec![]);
        let got: Vec<_> = r.findings.iter().map(|f| (f.weakness_type, f.location.method.clone().unwrap())).collect();
        assert_eq!(
            got,
            vec![
                (WeaknessType::AesEcbMode, "a()V".to_string()),
                (WeaknessType::AesEcbMode, "b()V".to_string()),
                (WeaknessType::InsecureHash, "h()V".to_string()),
            ]
        );
        assert_eq!(r.summary.total, 3);
        assert_eq!(r.summary.by_type["Improper AES: ECB mode"], 2);
        assert_eq!(r.summary.by_category[&Category::C4], 3);
    }

    #[test]
    fn empty_report_round_trips() {
        let r = assemble(&[], &RuleOutcome::default(), AppMeta::default(), ScanMeta::default(), vec![]);
        let json = r.to_json();
        assert!(json.contains("\"findings\": []"));
        assert_eq!(Report::from_json(&json).unwrap(), r);
    }
}
