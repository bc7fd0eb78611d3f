//! End-to-end pipeline: tagging, function identification, weakness
//! detection, report assembly. Also the batch corpus driver.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use time::{Date, OffsetDateTime};

use crate::dataflow::consts::FieldConsts;
use crate::error::{Diagnostic, Error, Result};
use crate::graph::{build_call_graph, call_graph_dot, find_entry_points, CallGraph, EntryPoints, Reachability};
use crate::report::{assemble, AppMeta, CatalogInfo, CorpusEntry, CorpusSummary, Report, ScanMeta};
use crate::resources::{RTable, Resources};
use crate::rules::{scan_patterns, RuleContext, RuleOptions, RuleOutcome, RulesFile};
use crate::smali::{load_program, SmaliProgram};
use crate::tagging::{bind_variables, tag_layouts, KeywordCatalog, Stoplist, TaggedVariable, DEFAULT_THRESHOLD};
use crate::taint::{forward_taint, FlowPath, SinkCatalog, Supergraph, TaintConfig, DEFAULT_BUDGET};

/// Options shared by every scan in a run.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub keywords: Option<PathBuf>,
    pub sinks: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    /// Embedding-neighbor file used to expand the keyword catalog.
    pub neighbors: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub no_reachability: bool,
    pub strict_keys: bool,
    pub reference_date: Date,
    pub jobs: usize,
    /// Directory receiving `<app>.callgraph.dot` files.
    pub dump_graphs: Option<PathBuf>,
    /// Record wall-clock durations in reports (makes output time-dependent).
    pub timing: bool,
    pub budget: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            keywords: None,
            sinks: None,
            rules: None,
            neighbors: None,
            stoplist: None,
            no_reachability: false,
            strict_keys: false,
            reference_date: OffsetDateTime::now_utc().date(),
            jobs: 1,
            dump_graphs: None,
            timing: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(())
    }
}

/// Catalogs and options loaded once and shared read-only by all scans.
#[derive(Debug, Clone)]
pub struct Scanner {
    pub config: ScanConfig,
    pub keywords: KeywordCatalog,
    pub sinks: SinkCatalog,
    pub options: RuleOptions,
    keywords_info: CatalogInfo,
    sinks_info: CatalogInfo,
    rules_origin: String,
}

fn origin(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "builtin".into())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Everything one scan produced, for callers that need more than the report.
pub struct Analysis {
    pub program: SmaliProgram,
    pub resources: Resources,
    pub call_graph: CallGraph,
    pub entries: EntryPoints,
    pub tagged: Vec<TaggedVariable>,
    pub flows: Vec<FlowPath>,
    pub rules: RuleOutcome,
    pub report: Report,
}

impl Scanner {
    pub fn new(config: ScanConfig) -> Result<Scanner> {
        config.validate()?;
        let mut keywords = match &config.keywords {
            Some(p) => KeywordCatalog::from_file(p)?,
            None => KeywordCatalog::builtin(),
        };
        if let Some(n) = &config.neighbors {
            let stoplist = match &config.stoplist {
                Some(p) => Stoplist::parse(&read(p)?),
                None => Stoplist::builtin(),
            };
            keywords = keywords.expand(&read(n)?, DEFAULT_THRESHOLD, &stoplist)?;
        }
        let sinks = match &config.sinks {
            Some(p) => SinkCatalog::from_file(p)?,
            None => SinkCatalog::builtin(),
        };
        let mut options = RuleOptions::new(config.reference_date.midnight().assume_utc());
        options.no_reachability = config.no_reachability;
        options.strict_keys = config.strict_keys;
        if let Some(p) = &config.rules {
            options.apply(&RulesFile::from_file(p)?);
        }
        let keywords_info = CatalogInfo {
            origin: match &config.neighbors {
                Some(_) => format!("{} + {}", origin(&config.keywords), origin(&config.neighbors)),
                None => origin(&config.keywords),
            },
            entries: keywords.len(),
        };
        let sinks_info = CatalogInfo { origin: origin(&config.sinks), entries: sinks.len() };
        let rules_origin = origin(&config.rules);
        Ok(Scanner { config, keywords, sinks, options, keywords_info, sinks_info, rules_origin })
    }

    pub fn scan(&self, app_dir: &Path) -> Result<Report> {
        self.analyze(app_dir).map(|a| a.report)
    }

    /// Runs the whole pipeline on one unpacked app.
    pub fn analyze(&self, app_dir: &Path) -> Result<Analysis> {
        let started = Instant::now();
        let resources = Resources::load(app_dir)?;
        let program = load_program(app_dir)?;
        let mut diagnostics: Vec<Diagnostic> = program.diagnostics.clone();
        diagnostics.extend(resources.diagnostics.iter().cloned());

        // sensitive input tagging
        let fields = FieldConsts::compute(&program);
        let views = tag_layouts(&resources.layouts, &self.keywords);
        let rtable = RTable::load(app_dir, &program, &mut diagnostics);
        let tagged = bind_variables(&program, &views, &rtable, &fields, &mut diagnostics);

        // function identification
        let cg = build_call_graph(&program, &resources.manifest);
        let entries = find_entry_points(&program, &resources.manifest, &resources.layouts, &cg, &fields);
        let reach = Reachability::new(&cg, entries.nodes());
        if let Some(dir) = &self.config.dump_graphs {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(format!("{}.callgraph.dot", app_name(app_dir)));
            fs::write(&path, call_graph_dot(&cg)).map_err(|e| Error::io(&path, e))?;
        }

        // weakness detection
        let graph = Supergraph::build(&program, &cg, &fields);
        let outcome = forward_taint(graph, &tagged, &self.sinks, &fields, TaintConfig { budget: self.config.budget });
        diagnostics.extend(outcome.facts.diagnostics.iter().cloned());
        let ctx = RuleContext {
            program: &program,
            manifest: &resources.manifest,
            package_files: &resources.package_files,
            cg: &cg,
            entries: &entries,
            reach: &reach,
            taint: &outcome.facts,
            fields: &fields,
            tagged: &tagged,
            catalog: &self.keywords,
            options: &self.options,
        };
        let rules = scan_patterns(&ctx);
        let truncated = outcome.facts.truncated;
        let flows = outcome.flows;

        let m = &resources.manifest;
        let app = AppMeta {
            name: app_name(app_dir),
            package: m.package.clone(),
            version_name: m.version_name.clone(),
            version_code: m.version_code.clone(),
        };
        let scan = ScanMeta {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            keywords: self.keywords_info.clone(),
            sinks: self.sinks_info.clone(),
            rules: self.rules_origin.clone(),
            no_reachability: self.options.no_reachability,
            strict_keys: self.options.strict_keys,
            reference_date: self.config.reference_date.to_string(),
            truncated,
            duration_ms: self.config.timing.then(|| started.elapsed().as_millis() as u64),
        };
        let report = assemble(&flows, &rules, app, scan, diagnostics);
        drop(reach);
        Ok(Analysis { program, resources, call_graph: cg, entries, tagged, flows, rules, report })
    }

    /// Scans every subdirectory of `root` with up to `jobs` apps in flight.
    /// A failing app becomes a failure entry; it never aborts the batch.
    pub fn scan_corpus(&self, root: &Path) -> Result<CorpusRun> {
        let apps = corpus_apps(root)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let results: Vec<(String, std::result::Result<Report, String>)> = pool.install(|| {
            apps.par_iter()
                .map(|dir| {
                    let name = app_name(dir);
                    let r = match catch_unwind(AssertUnwindSafe(|| self.scan(dir))) {
                        Ok(Ok(r)) => Ok(r),
                        Ok(Err(e)) => Err(e.to_string()),
                        Err(p) => Err(format!("internal error: {}", panic_message(&p))),
                    };
                    (name, r)
                })
                .collect()
        });
        let mut entries = Vec::new();
        let mut reports = Vec::new();
        for (name, r) in results {
            match r {
                Ok(report) => {
                    entries.push(CorpusEntry::scanned(&name, &report));
                    reports.push((name, report));
                }
                Err(e) => entries.push(CorpusEntry::failed(&name, e)),
            }
        }
        Ok(CorpusRun { summary: CorpusSummary::from_entries(entries), reports })
    }
}

pub struct CorpusRun {
    pub summary: CorpusSummary,
    /// Successful reports by app name, sorted.
    pub reports: Vec<(String, Report)>,
}

impl CorpusRun {
    /// Writes `<app>.json` per report and `summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, r) in &self.reports {
            let p = dir.join(format!("{name}.json"));
            fs::write(&p, r.to_json()).map_err(|e| Error::io(&p, e))?;
        }
        let p = dir.join("summary.json");
        fs::write(&p, self.summary.to_json()).map_err(|e| Error::io(&p, e))
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

pub fn app_name(dir: &Path) -> String {
    dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string())
}

/// Non-hidden subdirectories of `root`, sorted by name.
pub fn corpus_apps(root: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(format!("{} does not exist", root.display())),
        _ => Error::io(root, e),
    })?;
    let mut apps: Vec<PathBuf> = rd
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_dir() && !app_name(p).starts_with('.'))
        .collect();
    apps.sort();
    Ok(apps)
}

/// Parses `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> Result<Date> {
    let fmt = time::macros::format_description!("[year]-[month]-[day]");
    Date::parse(s, &fmt).map_err(|e| Error::Config(format!("bad date `{s}`: {e}")))
}
