use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::resources::ManifestInfo;
use crate::smali::{InvokeKind, MethodKey, Op, SmaliProgram};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CgNode {
    pub method: MethodKey,
    /// Stub for a method outside the program (framework, library, reflection).
    pub external: bool,
    pub is_static: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CallEdgeKind {
    /// Ordinary invoke resolved by class hierarchy analysis.
    Call,
    /// Framework callback on an object allocated by the caller
    /// (listener, runnable, trust manager, ...).
    Callback,
    /// Intent dispatch to a component's lifecycle method.
    Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CallEdge {
    pub caller: NodeId,
    pub callee: NodeId,
    pub kind: CallEdgeKind,
    /// Instruction index in the caller.
    pub site: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub is_component: bool,
    /// The class itself and every program class inheriting from it.
    pub subtypes: BTreeSet<String>,
}

/// Call graph over program methods plus external stubs.
#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    nodes: Vec<CgNode>,
    index: HashMap<MethodKey, NodeId>,
    edges: Vec<CallEdge>,
    edge_set: BTreeSet<(NodeId, NodeId, CallEdgeKind, Option<usize>)>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    instantiations: Vec<BTreeSet<String>>,
    classes: BTreeMap<String, ClassInfo>,
}

impl CallGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node, or returns the existing one for `method`.
    pub fn add_node(&mut self, method: MethodKey, external: bool, is_static: bool) -> NodeId {
        if let Some(&id) = self.index.get(&method) {
            return id;
        }
        let id = self.nodes.len();
        self.index.insert(method.clone(), id);
        self.nodes.push(CgNode { method, external, is_static });
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        self.instantiations.push(BTreeSet::new());
        id
    }

    pub fn add_edge(&mut self, caller: NodeId, callee: NodeId, kind: CallEdgeKind, site: Option<usize>) {
        if !self.edge_set.insert((caller, callee, kind, site)) {
            return;
        }
        let e = self.edges.len();
        self.edges.push(CallEdge { caller, callee, kind, site });
        self.succ[caller].push(e);
        self.pred[callee].push(e);
    }

    /// Records that `node` allocates an instance of `class`.
    pub fn add_instantiation(&mut self, node: NodeId, class: &str) {
        self.instantiations[node].insert(class.to_string());
    }

    pub fn set_class(&mut self, class: &str, info: ClassInfo) {
        self.classes.insert(class.to_string(), info);
    }

    pub fn node(&self, id: NodeId) -> &CgNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[CgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CallEdge] {
        &self.edges
    }

    pub fn node_id(&self, method: &MethodKey) -> Option<NodeId> {
        self.index.get(method).copied()
    }

    pub fn callees(&self, id: NodeId) -> impl Iterator<Item = &CallEdge> + '_ {
        self.succ[id].iter().map(move |&e| &self.edges[e])
    }

    pub fn callers(&self, id: NodeId) -> impl Iterator<Item = &CallEdge> + '_ {
        self.pred[id].iter().map(move |&e| &self.edges[e])
    }

    pub fn instantiations(&self, id: NodeId) -> &BTreeSet<String> {
        &self.instantiations[id]
    }

    pub fn class_info(&self, class: &str) -> Option<&ClassInfo> {
        self.classes.get(class)
    }

    pub fn has_edge(&self, caller: NodeId, callee: NodeId) -> bool {
        self.succ[caller].iter().any(|&e| self.edges[e].callee == callee)
    }

    /// Program methods that `method`'s invoke at `site` may dispatch to.
    pub fn targets_at(&self, caller: NodeId, site: usize) -> Vec<NodeId> {
        self.callees(caller)
            .filter(|e| e.site == Some(site) && e.kind == CallEdgeKind::Call)
            .map(|e| e.callee)
            .collect()
    }
}

const DISPATCH: &[&str] = &[
    "startActivity",
    "startActivityForResult",
    "startActivities",
    "startService",
    "startForegroundService",
    "bindService",
    "sendBroadcast",
    "sendOrderedBroadcast",
    "sendStickyBroadcast",
];

pub const LIFECYCLE: &[&str] = &[
    "onCreate",
    "onStart",
    "onResume",
    "onPause",
    "onStop",
    "onDestroy",
    "onRestart",
    "onNewIntent",
    "onActivityResult",
    "onStartCommand",
    "onBind",
    "onHandleIntent",
    "onReceive",
];

/// Resolves invoke targets by class hierarchy analysis.
pub fn resolve_invoke(program: &SmaliProgram, kind: InvokeKind, method: &crate::smali::MethodRef) -> Vec<MethodKey> {
    let desc = method.descriptor();
    match kind {
        InvokeKind::Static | InvokeKind::Direct | InvokeKind::Super => {
            program.find_method_in_chain(&method.class, &method.name, &desc).into_iter().collect()
        }
        InvokeKind::Virtual | InvokeKind::Interface => {
            let mut out = BTreeSet::new();
            if let Some(k) = program.find_method_in_chain(&method.class, &method.name, &desc) {
                out.insert(k);
            }
            for sub in program.subtypes_of(&method.class) {
                if sub.is_interface() {
                    continue;
                }
                if let Some(k) = program.find_method_in_chain(&sub.name, &method.name, &desc) {
                    out.insert(k);
                }
            }
            out.into_iter()
                .filter(|k| program.method(k).is_some_and(|m| !m.is_abstract()))
                .collect()
        }
    }
}

/// Builds the call graph with call, callback and component-transition edges.
pub fn build_call_graph(program: &SmaliProgram, manifest: &ManifestInfo) -> CallGraph {
    let mut cg = CallGraph::new();
    for (class, method) in program.methods() {
        cg.add_node(MethodKey::of(class, method), false, method.is_static());
    }

    for class in program.classes.values() {
        let declared = manifest.component(&class.name).is_some()
            || manifest.application_class.as_deref() == Some(class.name.as_str());
        let subtypes = program.subtypes_of(&class.name).into_iter().map(|c| c.name.clone()).collect();
        cg.set_class(&class.name, ClassInfo { is_component: declared || class.component.is_component(), subtypes });
    }

    for (class, method) in program.methods() {
        let caller = cg.node_id(&MethodKey::of(class, method)).expect("node added above");
        let mut component_targets = BTreeSet::new();
        let mut dispatch_sites = Vec::new();
        for (i, ins) in method.instructions.iter().enumerate() {
            match &ins.op {
                Op::Invoke { kind, method: mref, .. } => {
                    let targets = resolve_invoke(program, *kind, mref);
                    let external_receiver = program.class(&mref.class).is_none();
                    if targets.is_empty() || (external_receiver && matches!(kind, InvokeKind::Virtual | InvokeKind::Interface)) {
                        let stub = cg.add_node(mref.key(), true, *kind == InvokeKind::Static);
                        cg.add_edge(caller, stub, CallEdgeKind::Call, Some(i));
                    }
                    for t in targets {
                        let callee = cg.node_id(&t).expect("program method has a node");
                        cg.add_edge(caller, callee, CallEdgeKind::Call, Some(i));
                    }
                    if DISPATCH.contains(&mref.name.as_str()) {
                        dispatch_sites.push(i);
                    }
                }
                Op::NewInstance { class: k, .. } => {
                    cg.add_instantiation(caller, k);
                    for m in callback_methods(program, k) {
                        let callee = cg.node_id(&m).expect("program method has a node");
                        cg.add_edge(caller, callee, CallEdgeKind::Callback, Some(i));
                    }
                }
                Op::ConstClass { class: k, .. }
                    if program.class(k).is_some_and(|c| c.component.is_component()) || manifest.component(k).is_some() =>
                {
                    component_targets.insert(k.clone());
                }
                _ => {}
            }
        }
        if let Some(&site) = dispatch_sites.first() {
            for target in component_targets {
                for name in LIFECYCLE {
                    for m in program.class(&target).into_iter().flat_map(|c| c.methods_named(name)) {
                        let key = MethodKey::new(&target, &m.name, &m.descriptor);
                        let callee = cg.node_id(&key).expect("program method has a node");
                        cg.add_edge(caller, callee, CallEdgeKind::Transition, Some(site));
                    }
                }
            }
        }
    }
    cg
}

/// Methods the framework may call on an instance of `class`: its non-static,
/// non-private, non-constructor methods, when it derives from a framework type.
fn callback_methods(program: &SmaliProgram, class: &str) -> Vec<MethodKey> {
    let Some(def) = program.class(class) else { return Vec::new() };
    let framework_super = program
        .supertypes(class)
        .iter()
        .any(|t| t != "Ljava/lang/Object;" && program.class(t).is_none());
    if !framework_super {
        return Vec::new();
    }
    def.methods
        .iter()
        .filter(|m| !m.is_static() && !m.is_constructor() && !m.is_abstract() && !m.flags.iter().any(|f| f == "private"))
        .map(|m| MethodKey::of(def, m))
        .collect()
}
