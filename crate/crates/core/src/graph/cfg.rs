use std::collections::BTreeSet;

use serde::Serialize;

use crate::smali::{MethodDef, MethodKey, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Fallthrough,
    Branch,
    Exception,
}

/// Instructions `start..end` of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BasicBlock {
    pub start: usize,
    pub end: usize,
}

impl BasicBlock {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cfg {
    pub method: MethodKey,
    pub blocks: Vec<BasicBlock>,
    /// (from block, to block, kind), sorted and unique.
    pub edges: Vec<(usize, usize, EdgeKind)>,
    /// Index of the entry block; `None` for methods without instructions.
    pub entry: Option<usize>,
}

impl Cfg {
    pub fn block_of(&self, instr: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.start <= instr && instr < b.end)
    }

    pub fn successors(&self, block: usize) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
        self.edges.iter().filter(move |e| e.0 == block).map(|e| (e.1, e.2))
    }

    pub fn predecessors(&self, block: usize) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
        self.edges.iter().filter(move |e| e.1 == block).map(|e| (e.0, e.2))
    }
}

/// Normal-flow successor instruction indices of instruction `i`.
pub fn normal_successors(method: &MethodDef, i: usize) -> Vec<usize> {
    let n = method.instructions.len();
    let label = |l: &str| method.label_index(l).filter(|&t| t < n);
    let next = (i + 1 < n).then_some(i + 1);
    match &method.instructions[i].op {
        Op::Goto { target } => label(target).into_iter().collect(),
        Op::If { target, .. } => {
            let mut v: Vec<usize> = label(target).into_iter().collect();
            v.extend(next);
            v
        }
        Op::Switch { payload, .. } => {
            let mut v: Vec<usize> = method
                .switch_payloads
                .get(payload)
                .map(|p| p.targets.iter().filter_map(|(_, t)| label(t)).collect())
                .unwrap_or_default();
            v.extend(next);
            v.sort_unstable();
            v.dedup();
            v
        }
        Op::Return { .. } | Op::Throw { .. } => Vec::new(),
        _ => next.into_iter().collect(),
    }
}

/// Handlers that instruction `i` may transfer to when it throws.
pub fn exception_successors(method: &MethodDef, i: usize) -> Vec<usize> {
    let mut v = Vec::new();
    for tb in &method.try_blocks {
        let (Some(s), Some(e), Some(h)) =
            (method.label_index(&tb.start), method.label_index(&tb.end), method.label_index(&tb.handler))
        else {
            continue;
        };
        if s <= i && i < e && h < method.instructions.len() && !v.contains(&h) {
            v.push(h);
        }
    }
    v
}

/// Partitions a method into basic blocks.
pub fn build_cfg(class: &str, method: &MethodDef) -> Cfg {
    let key = MethodKey::new(class, &method.name, &method.descriptor);
    let n = method.instructions.len();
    if n == 0 {
        return Cfg { method: key, blocks: Vec::new(), edges: Vec::new(), entry: None };
    }

    let mut leaders = BTreeSet::from([0usize]);
    for i in 0..n {
        let op = &method.instructions[i].op;
        if op.is_branch() && i + 1 < n {
            leaders.insert(i + 1);
        }
        if op.is_branch() {
            leaders.extend(normal_successors(method, i));
        }
    }
    for tb in &method.try_blocks {
        for l in [&tb.start, &tb.end, &tb.handler] {
            if let Some(i) = method.label_index(l).filter(|&i| i < n) {
                leaders.insert(i);
            }
        }
    }

    let starts: Vec<usize> = leaders.into_iter().collect();
    let mut blocks: Vec<BasicBlock> = starts
        .iter()
        .enumerate()
        .map(|(k, &s)| BasicBlock { start: s, end: starts.get(k + 1).copied().unwrap_or(n) })
        .collect();

    let block_at = |instr: usize, blocks: &[BasicBlock]| blocks.iter().position(|b| b.start <= instr && instr < b.end);
    let mut edges = BTreeSet::new();
    for (b, block) in blocks.iter().enumerate() {
        let last = block.end - 1;
        for s in normal_successors(method, last) {
            let kind = if is_target(method, last, s) { EdgeKind::Branch } else { EdgeKind::Fallthrough };
            if let Some(t) = block_at(s, &blocks) {
                edges.insert((b, t, kind));
            }
        }
        let mut handlers = BTreeSet::new();
        for i in block.start..block.end {
            handlers.extend(exception_successors(method, i));
        }
        for h in handlers {
            if let Some(t) = block_at(h, &blocks) {
                edges.insert((b, t, EdgeKind::Exception));
            }
        }
    }

    // keep the entry free of in-method predecessors
    let mut edges: Vec<_> = edges.into_iter().collect();
    if edges.iter().any(|e| e.1 == 0) {
        blocks.insert(0, BasicBlock { start: 0, end: 0 });
        for e in &mut edges {
            e.0 += 1;
            e.1 += 1;
        }
        edges.insert(0, (0, 1, EdgeKind::Fallthrough));
    }
    Cfg { method: key, blocks, edges, entry: Some(0) }
}

/// True if `s` is reached from `i` by taking the branch rather than falling through.
fn is_target(method: &MethodDef, i: usize, s: usize) -> bool {
    let labels = match &method.instructions[i].op {
        Op::Goto { target } | Op::If { target, .. } => vec![target.clone()],
        Op::Switch { payload, .. } => method
            .switch_payloads
            .get(payload)
            .map(|p| p.targets.iter().map(|t| t.1.clone()).collect())
            .unwrap_or_default(),
        _ => Vec::new(),
    };
    labels.iter().any(|l| method.label_index(l) == Some(s))
}
