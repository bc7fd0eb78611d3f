//! Random call graphs checked against an all-pairs path closure.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bankscan::graph::{CallEdgeKind, CallGraph, ClassInfo, NodeId, Reachability};
use bankscan::smali::MethodKey;

pub struct RandomGraph {
    pub seed: u64,
    pub cg: CallGraph,
    pub entries: Vec<NodeId>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
    /// Per node: class, static, external.
    pub nodes: Vec<(String, bool, bool)>,
    /// Per class: component, subtypes.
    pub classes: Vec<(bool, BTreeSet<String>)>,
    pub allocs: Vec<(NodeId, String)>,
}

fn class_name(c: usize) -> String {
    format!("Lgen/C{c};")
}

pub fn generate(seed: u64) -> RandomGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=30);
    let k = rng.gen_range(1..=6);
    let mut cg = CallGraph::new();
    let mut nodes = Vec::new();
    for i in 0..n {
        let c = rng.gen_range(0..k);
        let is_static = rng.gen_bool(0.2);
        let external = rng.gen_bool(0.1);
        cg.add_node(MethodKey::new(&class_name(c), &format!("m{i}"), "()V"), external, is_static);
        nodes.push((class_name(c), is_static, external));
    }
    // a class's subtypes are itself plus an optional higher-numbered class
    let mut classes = Vec::new();
    for c in 0..k {
        let mut subtypes = BTreeSet::from([class_name(c)]);
        if c + 1 < k && rng.gen_bool(0.3) {
            subtypes.insert(class_name(rng.gen_range(c + 1..k)));
        }
        let is_component = rng.gen_bool(0.3);
        cg.set_class(&class_name(c), ClassInfo { is_component, subtypes: subtypes.clone() });
        classes.push((is_component, subtypes));
    }
    let density = rng.gen_range(0.5..2.5);
    let m = ((n as f64) * density) as usize;
    let mut edges = BTreeSet::new();
    for _ in 0..m {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let kind = [CallEdgeKind::Call, CallEdgeKind::Callback, CallEdgeKind::Transition][rng.gen_range(0..3)];
        cg.add_edge(a, b, kind, Some(edges.len()));
        edges.insert((a, b));
    }
    let mut allocs = Vec::new();
    for _ in 0..rng.gen_range(0..=k) {
        let (at, c) = (rng.gen_range(0..n), class_name(rng.gen_range(0..k)));
        cg.add_instantiation(at, &c);
        allocs.push((at, c));
    }
    let mut entries: Vec<NodeId> = (0..n).filter(|_| rng.gen_bool(0.15)).collect();
    if entries.is_empty() && rng.gen_bool(0.8) {
        entries.push(rng.gen_range(0..n));
    }
    RandomGraph { seed, cg, entries, edges, nodes, classes, allocs }
}

pub struct Expected {
    pub path_exists: bool,
    pub instantiated: bool,
    /// Edges on a shortest entry-to-target path.
    pub distance: Option<usize>,
}

impl RandomGraph {
    /// Floyd-Warshall over hop counts: dist[a][b] is the fewest edges on any
    /// a-to-b path, `None` when there is none.
    fn distances(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.nodes.len();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for &(a, b) in &self.edges {
            if a != b {
                d[a][b] = Some(1);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| x + y < c) {
                            d[i][j] = Some(x + y);
                        }
                    }
                }
            }
        }
        d
    }

    pub fn expected(&self) -> Vec<Expected> {
        let d = self.distances();
        let n = self.nodes.len();
        let from_entries = |t: usize| self.entries.iter().filter_map(|&e| d[e][t]).min();
        let live: BTreeSet<&String> =
            self.allocs.iter().filter(|(at, _)| from_entries(*at).is_some()).map(|(_, c)| c).collect();
        (0..n)
            .map(|t| {
                let (class, is_static, external) = &self.nodes[t];
                let c: usize = class[6..class.len() - 1].parse().unwrap();
                let (component, subtypes) = &self.classes[c];
                let instantiated = *is_static || *external || *component || subtypes.iter().any(|s| live.contains(s));
                let distance = from_entries(t);
                Expected { path_exists: distance.is_some(), instantiated, distance }
            })
            .collect()
    }

    /// Compares every node's query against the closure; returns mismatches.
    pub fn check(&self) -> Vec<String> {
        let r = Reachability::new(&self.cg, self.entries.iter().copied());
        let mut bad = Vec::new();
        for (t, exp) in self.expected().iter().enumerate() {
            let q = r.query(t);
            if q.path_exists != exp.path_exists || q.instantiated != exp.instantiated {
                bad.push(format!(
                    "seed {} node {t}: got path={} inst={}, want path={} inst={}",
                    self.seed, q.path_exists, q.instantiated, exp.path_exists, exp.instantiated
                ));
                continue;
            }
            if q.reachable != (exp.path_exists && exp.instantiated) {
                bad.push(format!("seed {} node {t}: reachable flag inconsistent", self.seed));
            }
            if let Some(dist) = exp.distance {
                let p = &q.path;
                let valid = p.first().is_some_and(|f| self.entries.contains(f))
                    && p.last() == Some(&t)
                    && p.windows(2).all(|w| self.edges.contains(&(w[0], w[1])));
                if !valid || p.len() != dist + 1 {
                    bad.push(format!("seed {} node {t}: witness {p:?} is not a shortest entry path ({dist} edges)", self.seed));
                }
            } else if !q.path.is_empty() {
                bad.push(format!("seed {} node {t}: witness for an unreachable node", self.seed));
            }
        }
        bad
    }
}
