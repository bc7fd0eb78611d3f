use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::callgraph::{CallEdgeKind, CallGraph, NodeId};

/// One hop of a witness path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub method: String,
    /// Edge that leads to the next step; `None` on the last one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<CallEdgeKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachResult {
    pub reachable: bool,
    pub path_exists: bool,
    pub instantiated: bool,
    /// Shortest entry-to-target path when one exists.
    pub path: Vec<NodeId>,
}

/// Entry-point reachability with an instantiation check on the target's class.
pub struct Reachability<'a> {
    cg: &'a CallGraph,
    entries: BTreeSet<NodeId>,
    forward: Vec<bool>,
    instantiated: BTreeSet<String>,
}

impl<'a> Reachability<'a> {
    pub fn new(cg: &'a CallGraph, entries: impl IntoIterator<Item = NodeId>) -> Self {
        let entries: BTreeSet<NodeId> = entries.into_iter().collect();
        let mut forward = vec![false; cg.nodes().len()];
        let mut queue: VecDeque<NodeId> = entries.iter().copied().collect();
        for &e in &entries {
            forward[e] = true;
        }
        while let Some(n) = queue.pop_front() {
            for e in cg.callees(n) {
                if !forward[e.callee] {
                    forward[e.callee] = true;
                    queue.push_back(e.callee);
                }
            }
        }
        let instantiated = (0..cg.nodes().len())
            .filter(|&n| forward[n])
            .flat_map(|n| cg.instantiations(n).iter().cloned())
            .collect();
        Reachability { cg, entries, forward, instantiated }
    }

    pub fn is_forward_reachable(&self, n: NodeId) -> bool {
        self.forward.get(n).copied().unwrap_or(false)
    }

    /// Whether an instance of `n`'s class can exist when `n` runs.
    pub fn is_instantiated(&self, n: NodeId) -> bool {
        let node = self.cg.node(n);
        if node.is_static || node.external {
            return true;
        }
        match self.cg.class_info(&node.method.class) {
            None => true,
            Some(info) if info.is_component => true,
            Some(info) => info.subtypes.iter().any(|s| self.instantiated.contains(s)),
        }
    }

    pub fn query(&self, target: NodeId) -> ReachResult {
        let path = self.shortest_path(target);
        let path_exists = !path.is_empty();
        let instantiated = self.is_instantiated(target);
        ReachResult { reachable: path_exists && instantiated, path_exists, instantiated, path }
    }

    /// Backward BFS from `target` to the nearest entry point.
    fn shortest_path(&self, target: NodeId) -> Vec<NodeId> {
        if !self.is_forward_reachable(target) {
            return Vec::new();
        }
        let n = self.cg.nodes().len();
        let mut next: Vec<Option<NodeId>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(cur) = queue.pop_front() {
            if self.entries.contains(&cur) {
                let mut path = vec![cur];
                let mut c = cur;
                while let Some(nx) = next[c] {
                    path.push(nx);
                    c = nx;
                }
                return path;
            }
            let mut preds: Vec<NodeId> = self.cg.callers(cur).map(|e| e.caller).collect();
            preds.sort_unstable();
            for p in preds {
                if !seen[p] {
                    seen[p] = true;
                    next[p] = Some(cur);
                    queue.push_back(p);
                }
            }
        }
        Vec::new()
    }

    /// Readable form of a path from [`ReachResult::path`].
    pub fn describe(&self, path: &[NodeId]) -> Vec<PathStep> {
        path.iter()
            .enumerate()
            .map(|(i, &n)| PathStep {
                method: self.cg.node(n).method.to_string(),
                via: path.get(i + 1).and_then(|&nx| {
                    self.cg.callees(n).filter(|e| e.callee == nx).map(|e| e.kind).min()
                }),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::callgraph::ClassInfo;
    use crate::smali::MethodKey;

    fn key(c: &str, m: &str) -> MethodKey {
        MethodKey::new(c, m, "()V")
    }

    #[test]
    fn dead_code_and_instantiation() {
        let mut cg = CallGraph::new();
        let entry = cg.add_node(key("LA;", "onCreate"), false, false);
        let helper = cg.add_node(key("LH;", "run"), false, false);
        let dead = cg.add_node(key("LD;", "go"), false, false);
        let other = cg.add_node(key("LH;", "other"), false, true);
        cg.add_edge(entry, helper, CallEdgeKind::Call, Some(0));
        cg.add_edge(dead, other, CallEdgeKind::Call, Some(0));
        cg.set_class("LA;", ClassInfo { is_component: true, subtypes: ["LA;".to_string()].into() });
        cg.set_class("LH;", ClassInfo { is_component: false, subtypes: ["LH;".to_string()].into() });
        let r = Reachability::new(&cg, [entry]);
        let q = r.query(helper);
        assert!(q.path_exists && !q.instantiated && !q.reachable);
        assert!(!r.query(dead).path_exists);
        assert!(!r.query(other).reachable);
        assert_eq!(r.query(entry).path, vec![entry]);

        cg.add_instantiation(entry, "LH;");
        let r = Reachability::new(&cg, [entry]);
        let q = r.query(helper);
        assert!(q.reachable);
        assert_eq!(q.path, vec![entry, helper]);
        assert_eq!(r.describe(&q.path)[0].via, Some(CallEdgeKind::Call));
    }
}
