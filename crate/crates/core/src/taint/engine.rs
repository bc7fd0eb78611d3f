use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::graph::{Fact, Supergraph};
use super::sinks::{position_register, SinkCatalog, SinkSpec};
use crate::dataflow::consts::{AbsVal, FieldConsts};
use crate::error::Diagnostic;
use crate::graph::NodeId;
use crate::smali::{arg_slots, InvokeKind, MethodKey, Op, Reg};
use crate::tagging::{SourceLine, TaggedVariable};
use crate::taxonomy::WeaknessType;

/// Default cap on propagated facts per app.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Auxiliary labels propagated like data to decide sink and rule conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    /// Derived from an external-storage directory or path.
    ExternalPath,
    /// Derived from a `.txt`/`.log`/`.csv` file name.
    TextFileName,
    /// An intent with an explicit target component.
    ExplicitIntent,
    /// Derived from a string or byte-array literal.
    HardcodedBytes,
    /// Derived from an `http://` literal.
    HttpUrl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// Index into the source list.
    Source(usize),
    Marker(Marker),
    /// Key or IV object built at a hard-coded-key candidate (index into candidates).
    KeyObject(usize),
}

/// Where a label enters the supergraph.
#[derive(Debug, Clone)]
struct Seed {
    fact: Fact,
    /// Statement that creates the label.
    origin: (NodeId, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FlowStep {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<SourceLine>,
    /// What carries the taint: a register, field, intent extra or return value.
    pub carrier: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowPath {
    pub source: TaggedVariable,
    pub sink: SinkSpec,
    pub sink_method: MethodKey,
    pub sink_index: usize,
    pub sink_line: SourceLine,
    pub steps: Vec<FlowStep>,
    pub crosses_components: bool,
    #[serde(skip)]
    facts: Vec<Fact>,
    #[serde(skip)]
    source_index: usize,
}

impl FlowPath {
    pub fn weakness(&self) -> WeaknessType {
        self.sink.weakness
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }
}

/// A literal flowing into key or IV construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyCandidate {
    pub method: MethodKey,
    pub index: usize,
    pub line: SourceLine,
    /// `SecretKeySpec` or `IvParameterSpec`.
    pub constructor: String,
    /// The literal, when the key bytes come straight from one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct TaintConfig {
    pub budget: usize,
}

impl Default for TaintConfig {
    fn default() -> Self {
        TaintConfig { budget: DEFAULT_BUDGET }
    }
}

/// Reach sets of every label, with BFS parents for witness reconstruction.
pub struct TaintFacts<'p> {
    pub graph: Supergraph<'p>,
    pub sources: Vec<TaggedVariable>,
    reach: BTreeMap<Label, HashMap<Fact, Option<Fact>>>,
    seeds: BTreeMap<Label, Vec<Seed>>,
    pub key_candidates: Vec<KeyCandidate>,
    pub truncated: bool,
    pub diagnostics: Vec<Diagnostic>,
    steps: usize,
}

const KEY_CLASSES: &[&str] = &["Ljavax/crypto/spec/SecretKeySpec;", "Ljavax/crypto/spec/IvParameterSpec;"];

const EXTERNAL_DIR_CALLS: &[&str] = &[
    "getExternalStorageDirectory",
    "getExternalStoragePublicDirectory",
    "getExternalFilesDir",
    "getExternalFilesDirs",
    "getExternalCacheDir",
    "getExternalCacheDirs",
    "getExternalMediaDirs",
];

fn is_exception_name(s: &str) -> bool {
    s.ends_with("Exception") || s.ends_with("Error")
}

fn is_external_path(s: &str) -> bool {
    let l = s.to_ascii_lowercase();
    l.starts_with("/sdcard") || l.starts_with("/mnt/sdcard") || l.starts_with("/storage/")
}

fn is_text_file_name(s: &str) -> bool {
    let l = s.to_ascii_lowercase();
    [".txt", ".log", ".csv"].iter().any(|e| l.ends_with(e))
}

impl<'p> TaintFacts<'p> {
    /// Runs every label to a fixpoint.
    pub fn compute(
        graph: Supergraph<'p>,
        sources: &[TaggedVariable],
        fields: &FieldConsts,
        config: TaintConfig,
    ) -> TaintFacts<'p> {
        let mut t = TaintFacts {
            graph,
            sources: sources.to_vec(),
            reach: BTreeMap::new(),
            seeds: BTreeMap::new(),
            key_candidates: Vec::new(),
            truncated: false,
            diagnostics: Vec::new(),
            steps: 0,
        };
        t.collect_seeds(fields);
        let labels: Vec<Label> = t.seeds.keys().copied().collect();
        for l in labels {
            t.propagate(l, config.budget);
        }
        t.find_key_candidates();
        for c in 0..t.key_candidates.len() {
            t.propagate(Label::KeyObject(c), config.budget);
        }
        if t.truncated {
            t.diagnostics.push(Diagnostic::new(
                "taint",
                "",
                format!("analysis budget of {} facts exhausted; results are partial", config.budget),
            ));
        }
        t
    }

    fn method_key(&self, m: NodeId) -> MethodKey {
        let c = self.graph.ctx(m).expect("program method");
        MethodKey::of(c.class, c.method)
    }

    fn node_of(&self, key: &MethodKey) -> Option<NodeId> {
        self.graph
            .methods
            .iter()
            .position(|c| c.as_ref().is_some_and(|c| c.class.name == key.class && c.method.name == key.name && c.method.descriptor == key.descriptor))
    }

    fn add_seed(&mut self, label: Label, m: NodeId, i: usize, r: Reg) {
        for fact in self.graph.after(m, i, r) {
            self.seeds.entry(label).or_default().push(Seed { fact, origin: (m, i) });
        }
    }

    fn collect_seeds(&mut self, fields: &FieldConsts) {
        let index: HashMap<MethodKey, NodeId> = self
            .graph
            .methods
            .iter()
            .enumerate()
            .filter_map(|(id, c)| c.as_ref().map(|c| (MethodKey::of(c.class, c.method), id)))
            .collect();
        let mut live: HashMap<NodeId, Vec<bool>> = HashMap::new();
        for (k, s) in self.sources.clone().iter().enumerate() {
            if let Some(&m) = index.get(&s.method) {
                let live = live.entry(m).or_insert_with(|| self.graph.ctx(m).map(|c| c.live()).unwrap_or_default());
                // a lookup in dead code never produces a value
                if !live.get(s.result_index).copied().unwrap_or(false) {
                    continue;
                }
                // the seed statement is the lookup call; taint starts after the move-result
                for fact in self.graph.after(m, s.result_index, s.result_reg) {
                    self.seeds.entry(Label::Source(k)).or_default().push(Seed { fact, origin: (m, s.result_index - 1) });
                }
            }
        }

        let mut marker_seeds: Vec<(Marker, NodeId, usize, Reg)> = Vec::new();
        for (m, ctx) in self.graph.methods.iter().enumerate() {
            let Some(ctx) = ctx else { continue };
            let result = ctx.result_reg();
            for (i, ins) in ctx.method.instructions.iter().enumerate() {
                match &ins.op {
                    Op::ConstString { dst, value } => {
                        if is_external_path(value) {
                            marker_seeds.push((Marker::ExternalPath, m, i, *dst));
                        }
                        if is_text_file_name(value) {
                            marker_seeds.push((Marker::TextFileName, m, i, *dst));
                        }
                        if value.to_ascii_lowercase().starts_with("http://") {
                            marker_seeds.push((Marker::HttpUrl, m, i, *dst));
                        }
                        if !value.is_empty() && !is_exception_name(value) {
                            marker_seeds.push((Marker::HardcodedBytes, m, i, *dst));
                        }
                    }
                    Op::FillArrayData { array, .. } => marker_seeds.push((Marker::HardcodedBytes, m, i, *array)),
                    Op::StaticGet { dst, field } => {
                        if let AbsVal::Str(s) = fields.get(field) {
                            if !s.is_empty() && !is_exception_name(&s) {
                                marker_seeds.push((Marker::HardcodedBytes, m, i, *dst));
                            }
                        }
                    }
                    Op::Invoke { kind, args, method } => {
                        if EXTERNAL_DIR_CALLS.contains(&method.name.as_str()) {
                            marker_seeds.push((Marker::ExternalPath, m, i, result));
                        }
                        if method.class == "Landroid/content/Intent;" && *kind != InvokeKind::Static {
                            let explicit = match method.name.as_str() {
                                "<init>" => method
                                    .parameters
                                    .iter()
                                    .any(|p| p == "Ljava/lang/Class;" || p == "Landroid/content/ComponentName;"),
                                "setClass" | "setClassName" | "setComponent" | "setPackage" => true,
                                _ => false,
                            };
                            if explicit {
                                marker_seeds.push((Marker::ExplicitIntent, m, i, args[0]));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for (mk, m, i, r) in marker_seeds {
            self.add_seed(Label::Marker(mk), m, i, r);
        }
    }

    fn propagate(&mut self, label: Label, budget: usize) {
        let seeds = self.seeds.get(&label).cloned().unwrap_or_default();
        let mut reached: HashMap<Fact, Option<Fact>> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if let std::collections::hash_map::Entry::Vacant(e) = reached.entry(s.fact) {
                e.insert(None);
                queue.push_back(s.fact);
            }
        }
        while let Some(f) = queue.pop_front() {
            if self.steps >= budget {
                self.truncated = true;
                break;
            }
            self.steps += 1;
            for n in self.graph.successors(f) {
                if let std::collections::hash_map::Entry::Vacant(e) = reached.entry(n) {
                    e.insert(Some(f));
                    queue.push_back(n);
                }
            }
        }
        self.reach.insert(label, reached);
    }

    pub fn holds(&self, label: Label, m: NodeId, i: usize, r: Reg) -> bool {
        self.reach.get(&label).is_some_and(|s| s.contains_key(&Fact::Point { m, i: i as u32, r }))
    }

    pub fn marker_at(&self, marker: Marker, m: NodeId, i: usize, r: Reg) -> bool {
        self.holds(Label::Marker(marker), m, i, r)
    }

    /// Sources whose label reaches register `r` before instruction `i`.
    pub fn sources_at(&self, m: NodeId, i: usize, r: Reg) -> Vec<usize> {
        (0..self.sources.len()).filter(|&k| self.holds(Label::Source(k), m, i, r)).collect()
    }

    /// Sources whose label reaches the intent extra `key`.
    pub fn sources_in_extra(&self, key: &str) -> Vec<usize> {
        let Some(id) = self.graph.extra_key_id(key) else { return Vec::new() };
        (0..self.sources.len())
            .filter(|&k| self.reach.get(&Label::Source(k)).is_some_and(|s| s.contains_key(&Fact::Extra(id))))
            .collect()
    }

    pub fn key_object_at(&self, candidate: usize, m: NodeId, i: usize, r: Reg) -> bool {
        self.holds(Label::KeyObject(candidate), m, i, r)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn find_key_candidates(&mut self) {
        let mut found = Vec::new();
        for (m, ctx) in self.graph.methods.iter().enumerate() {
            let Some(ctx) = ctx else { continue };
            for (i, ins) in ctx.method.instructions.iter().enumerate() {
                let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
                if mref.name != "<init>" || !KEY_CLASSES.contains(&mref.class.as_str()) {
                    continue;
                }
                let slots = arg_slots(kind, args, mref);
                let Some(&bytes) = slots.get(1) else { continue };
                if !self.marker_at(Marker::HardcodedBytes, m, i, bytes) {
                    continue;
                }
                found.push((m, i, slots[0], mref.class.clone()));
            }
        }
        for (m, i, receiver, class) in found {
            let ctx = self.graph.ctx(m).expect("program method");
            let literal = self.literal_origin(Label::Marker(Marker::HardcodedBytes), m, i, {
                let (kind, args, mref) = ctx.method.instructions[i].op.as_invoke().expect("invoke");
                arg_slots(kind, args, mref)[1]
            });
            let idx = self.key_candidates.len();
            self.key_candidates.push(KeyCandidate {
                method: MethodKey::of(ctx.class, ctx.method),
                index: i,
                line: line_at(ctx.class, ctx.method, i),
                constructor: crate::smali::types::simple_name(&class).to_string(),
                literal,
            });
            self.add_seed(Label::KeyObject(idx), m, i, receiver);
        }
    }

    /// The string literal a label was seeded from, following BFS parents.
    fn literal_origin(&self, label: Label, m: NodeId, i: usize, r: Reg) -> Option<String> {
        let path = self.fact_path(label, Fact::Point { m, i: i as u32, r })?;
        let first = path.first()?;
        let origin = self.seeds.get(&label)?.iter().find(|s| s.fact == *first)?.origin;
        let ctx = self.graph.ctx(origin.0)?;
        match &ctx.method.instructions[origin.1].op {
            Op::ConstString { value, .. } => Some(value.clone()),
            _ => None,
        }
    }

    /// Seed-to-fact chain of BFS parents.
    fn fact_path(&self, label: Label, target: Fact) -> Option<Vec<Fact>> {
        let reach = self.reach.get(&label)?;
        let mut cur = target;
        let mut path = vec![cur];
        while let Some(p) = *reach.get(&cur)? {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// Checks a witness against the transfer relation: it must start at a
    /// seed of its source and every step must be a successor of the previous.
    pub fn replay(&self, flow: &FlowPath) -> bool {
        let label = Label::Source(flow.source_index);
        let Some(first) = flow.facts.first() else { return false };
        if !self.seeds.get(&label).is_some_and(|s| s.iter().any(|s| s.fact == *first)) {
            return false;
        }
        let linked = flow.facts.windows(2).all(|w| self.graph.successors(w[0]).contains(&w[1]));
        let Some(Fact::Point { m, i, r }) = flow.facts.last() else { return false };
        let Some(node) = self.node_of(&flow.sink_method) else { return false };
        linked && *m == node && *i as usize == flow.sink_index && {
            let ctx = self.graph.ctx(node).expect("program method");
            let (kind, args, mref) = ctx.method.instructions[flow.sink_index].op.as_invoke().expect("sink is an invoke");
            let slots = arg_slots(kind, args, mref);
            flow.sink.tainted_args.iter().any(|&p| position_register(kind, &slots, p) == Some(*r))
        }
    }

    fn describe(&self, fact: Fact) -> FlowStep {
        match fact {
            Fact::Point { m, i, r } => {
                let ctx = self.graph.ctx(m).expect("program method");
                let carrier = if r == ctx.result_reg() { "result".to_string() } else { format!("v{r}") };
                FlowStep {
                    method: self.method_key(m).to_string(),
                    index: Some(i as usize),
                    line: Some(line_at(ctx.class, ctx.method, i as usize)),
                    carrier,
                }
            }
            Fact::Field(f) => FlowStep {
                method: String::new(),
                index: None,
                line: None,
                carrier: format!("field {}", self.graph.field_name(f).unwrap_or("?")),
            },
            Fact::Extra(k) => FlowStep {
                method: String::new(),
                index: None,
                line: None,
                carrier: format!("extra \"{}\"", self.graph.extra_name(k).unwrap_or("?")),
            },
            Fact::Return(m) => FlowStep {
                method: self.method_key(m).to_string(),
                index: None,
                line: None,
                carrier: "return".into(),
            },
        }
    }

    fn build_flow(&self, source: usize, spec: &SinkSpec, m: NodeId, i: usize, r: Reg) -> Option<FlowPath> {
        let facts = self.fact_path(Label::Source(source), Fact::Point { m, i: i as u32, r })?;
        let ctx = self.graph.ctx(m)?;
        let src = &self.sources[source];
        let mut steps = vec![FlowStep {
            method: src.method.to_string(),
            index: Some(src.result_index - 1),
            line: Some(src.binding_site.clone()),
            carrier: format!("view {}", src.view_id),
        }];
        let mut last_carrier: Option<(String, String)> = None;
        for f in &facts {
            let step = self.describe(*f);
            let key = (step.method.clone(), step.carrier.clone());
            if last_carrier.as_ref() != Some(&key) {
                last_carrier = Some(key);
                steps.push(step);
            }
        }
        let sink_step = self.describe(Fact::Point { m, i: i as u32, r });
        if steps.last() != Some(&sink_step) {
            steps.push(sink_step);
        }
        let crosses_components = facts.iter().any(|f| matches!(f, Fact::Extra(_)));
        Some(FlowPath {
            source: src.clone(),
            sink: spec.clone(),
            sink_method: MethodKey::of(ctx.class, ctx.method),
            sink_index: i,
            sink_line: line_at(ctx.class, ctx.method, i),
            steps,
            crosses_components,
            facts,
            source_index: source,
        })
    }

    /// Sink-side conditions that depend on markers.
    fn sink_condition(&self, spec: &SinkSpec, m: NodeId, i: usize, kind: InvokeKind, slots: &[Reg], tainted: Reg) -> bool {
        let receiver = (kind != InvokeKind::Static).then(|| slots[0]);
        match spec.weakness {
            WeaknessType::SdCard => receiver.is_some_and(|r| self.marker_at(Marker::ExternalPath, m, i, r)),
            WeaknessType::TextFile => receiver.is_some_and(|r| self.marker_at(Marker::TextFileName, m, i, r)),
            WeaknessType::IccImplicitIntent => !self.marker_at(Marker::ExplicitIntent, m, i, tainted),
            _ => true,
        }
    }
}

pub fn line_at(class: &crate::smali::ClassDef, method: &crate::smali::MethodDef, i: usize) -> SourceLine {
    let ins = &method.instructions[i];
    SourceLine { file: class.display_path(), line: ins.file_line, java_line: ins.java_line }
}

/// Result of forward taint analysis.
pub struct TaintOutcome<'p> {
    pub flows: Vec<FlowPath>,
    pub facts: TaintFacts<'p>,
}

/// Forward propagation from tagged sources to catalog sinks. One path per
/// (source, sink site), with a replayable witness.
pub fn forward_taint<'p>(
    graph: Supergraph<'p>,
    sources: &[TaggedVariable],
    sinks: &SinkCatalog,
    fields: &FieldConsts,
    config: TaintConfig,
) -> TaintOutcome<'p> {
    let facts = TaintFacts::compute(graph, sources, fields, config);
    let mut flows = Vec::new();
    let mut seen = BTreeSet::new();
    for (m, ctx) in facts.graph.methods.iter().enumerate() {
        let Some(ctx) = ctx else { continue };
        for (i, ins) in ctx.method.instructions.iter().enumerate() {
            let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
            let specs = sinks.matching(facts.graph.program, mref);
            if specs.is_empty() {
                continue;
            }
            let slots = arg_slots(kind, args, mref);
            for spec in specs {
                for &p in &spec.tainted_args {
                    let Some(r) = position_register(kind, &slots, p) else { continue };
                    for s in facts.sources_at(m, i, r) {
                        if !facts.sink_condition(spec, m, i, kind, &slots, r) {
                            continue;
                        }
                        if !seen.insert((s, m, i, spec.weakness)) {
                            continue;
                        }
                        if let Some(f) = facts.build_flow(s, spec, m, i, r) {
                            flows.push(f);
                        }
                    }
                }
            }
        }
    }
    flows.sort_by(|a, b| {
        (&a.source, &a.sink_method, a.sink_index, a.sink.weakness).cmp(&(&b.source, &b.sink_method, b.sink_index, b.sink.weakness))
    });
    TaintOutcome { flows, facts }
}
