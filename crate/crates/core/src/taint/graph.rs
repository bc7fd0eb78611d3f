//! Exploded supergraph: one node per (method, instruction, register) plus
//! global nodes for fields, intent extras and method returns. Edges are the
//! per-instruction transfer relation; taint labels are propagated over it
//! independently of each other.

use std::collections::{BTreeMap, HashMap};

use crate::dataflow::consts::{AbsVal, ConstFacts, FieldConsts};
use crate::graph::cfg::{exception_successors, normal_successors};
use crate::graph::{CallEdgeKind, CallGraph, NodeId};
use crate::smali::{arg_slots, ClassDef, InvokeKind, MethodDef, MethodRef, Op, Reg, SmaliProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    /// Register `r` holds the label just before instruction `i` of method `m`.
    /// `r == register_count` is the pending invoke result.
    Point { m: NodeId, i: u32, r: Reg },
    Field(u32),
    Extra(u32),
    Return(NodeId),
}

pub(crate) struct MethodCtx<'p> {
    pub class: &'p ClassDef,
    pub method: &'p MethodDef,
    pub succ: Vec<Vec<u32>>,
    pub exc: Vec<Vec<u32>>,
    /// Constant propagation, computed for methods that touch intent extras.
    pub consts: Option<ConstFacts>,
}

impl MethodCtx<'_> {
    pub fn result_reg(&self) -> Reg {
        self.method.register_count
    }

    /// Instructions reachable from the method entry.
    pub fn live(&self) -> Vec<bool> {
        let mut live = vec![false; self.succ.len()];
        let mut stack = vec![0u32];
        while let Some(i) = stack.pop() {
            let i = i as usize;
            if i >= live.len() || live[i] {
                continue;
            }
            live[i] = true;
            stack.extend(self.succ[i].iter().chain(&self.exc[i]).copied());
        }
        live
    }
}

/// External calls whose arguments flow into the receiver object.
const INTO_RECEIVER: &[&str] = &[
    "<init>", "append", "add", "put", "set", "insert", "push", "offer", "write", "update", "init", "load", "print",
];

fn into_receiver(program: &SmaliProgram, m: &MethodRef) -> bool {
    if program.class(&m.class).is_some() || m.class.ends_with("Activity;") || m.class.ends_with("Context;") {
        return false;
    }
    INTO_RECEIVER.iter().any(|p| m.name.starts_with(p))
}

fn is_read_into(m: &MethodRef) -> bool {
    m.name == "read" || m.name == "readFully"
}

fn extra_put(m: &MethodRef) -> bool {
    (m.class == "Landroid/content/Intent;" && m.name.starts_with("put") && m.name.ends_with("Extra"))
        || (m.class == "Landroid/os/Bundle;" && m.name.starts_with("put") && m.parameters.first().is_some_and(|p| p == "Ljava/lang/String;"))
}

fn extra_get(m: &MethodRef) -> bool {
    (m.class == "Landroid/content/Intent;" && m.name.starts_with("get") && m.name.ends_with("Extra"))
        || (m.class == "Landroid/os/Bundle;" && m.name.starts_with("get") && m.parameters.first().is_some_and(|p| p == "Ljava/lang/String;"))
}

/// Constant key of an extra put/get call.
fn extra_key(ctx: &MethodCtx<'_>, i: usize, kind: InvokeKind, args: &[Reg], m: &MethodRef) -> Option<String> {
    let slots = arg_slots(kind, args, m);
    let key_reg = *slots.get(1)?;
    match ctx.consts.as_ref()?.reg(i, key_reg) {
        AbsVal::Str(s) => Some(s.clone()),
        _ => None,
    }
}

/// Per-call-site dispatch information.
#[derive(Debug, Clone, Default)]
pub(crate) struct Site {
    pub targets: Vec<NodeId>,
    pub external: bool,
}

pub struct Supergraph<'p> {
    pub(crate) program: &'p SmaliProgram,
    pub(crate) methods: Vec<Option<MethodCtx<'p>>>,
    sites: HashMap<(NodeId, u32), Site>,
    field_ids: BTreeMap<String, u32>,
    field_reads: Vec<Vec<(NodeId, u32, Reg)>>,
    extra_ids: BTreeMap<String, u32>,
    extra_reads: Vec<Vec<(NodeId, u32)>>,
    extra_writes: HashMap<(NodeId, u32), u32>,
    return_sites: Vec<Vec<(NodeId, u32)>>,
}

impl<'p> Supergraph<'p> {
    pub fn build(program: &'p SmaliProgram, cg: &CallGraph, fields: &FieldConsts) -> Supergraph<'p> {
        let n = cg.nodes().len();
        let mut g = Supergraph {
            program,
            methods: Vec::with_capacity(n),
            sites: HashMap::new(),
            field_ids: BTreeMap::new(),
            field_reads: Vec::new(),
            extra_ids: BTreeMap::new(),
            extra_reads: Vec::new(),
            extra_writes: HashMap::new(),
            return_sites: vec![Vec::new(); n],
        };
        for id in 0..n {
            let node = cg.node(id);
            let ctx = (!node.external)
                .then(|| {
                    let class = program.class(&node.method.class)?;
                    let method = class.method(&node.method.name, &node.method.descriptor)?;
                    let len = method.instructions.len();
                    let succ = (0..len).map(|i| normal_successors(method, i).into_iter().map(|s| s as u32).collect()).collect();
                    let exc = (0..len).map(|i| exception_successors(method, i).into_iter().map(|s| s as u32).collect()).collect();
                    let touches_extras = method
                        .instructions
                        .iter()
                        .any(|ins| ins.op.as_invoke().is_some_and(|(_, _, m)| extra_put(m) || extra_get(m)));
                    let consts = touches_extras.then(|| ConstFacts::analyze(class, method, fields));
                    Some(MethodCtx { class, method, succ, exc, consts })
                })
                .flatten();
            g.methods.push(ctx);
        }

        for e in cg.edges() {
            let Some(site) = e.site else { continue };
            if e.kind != CallEdgeKind::Call {
                continue;
            }
            let entry = g.sites.entry((e.caller, site as u32)).or_default();
            if cg.node(e.callee).external {
                entry.external = true;
            } else {
                entry.targets.push(e.callee);
                g.return_sites[e.callee].push((e.caller, site as u32));
            }
        }
        for s in g.sites.values_mut() {
            s.targets.sort_unstable();
            s.targets.dedup();
        }
        for r in &mut g.return_sites {
            r.sort_unstable();
            r.dedup();
        }

        let mut field_reads: BTreeMap<String, Vec<(NodeId, u32, Reg)>> = BTreeMap::new();
        let mut extra_reads: BTreeMap<String, Vec<(NodeId, u32)>> = BTreeMap::new();
        let mut extra_writes: Vec<((NodeId, u32), String)> = Vec::new();
        for (id, ctx) in g.methods.iter().enumerate() {
            let Some(ctx) = ctx else { continue };
            for (i, ins) in ctx.method.instructions.iter().enumerate() {
                match &ins.op {
                    Op::InstanceGet { dst, field, .. } | Op::StaticGet { dst, field } => {
                        field_reads.entry(field.to_string()).or_default().push((id, i as u32, *dst));
                    }
                    Op::Invoke { kind, args, method } if extra_get(method) => {
                        if let Some(k) = extra_key(ctx, i, *kind, args, method) {
                            extra_reads.entry(k).or_default().push((id, i as u32));
                        }
                    }
                    Op::Invoke { kind, args, method } if extra_put(method) => {
                        if let Some(k) = extra_key(ctx, i, *kind, args, method) {
                            extra_writes.push(((id, i as u32), k));
                        }
                    }
                    _ => {}
                }
            }
        }
        for (name, reads) in field_reads {
            g.field_ids.insert(name, g.field_reads.len() as u32);
            g.field_reads.push(reads);
        }
        for (key, reads) in extra_reads {
            g.extra_ids.insert(key, g.extra_reads.len() as u32);
            g.extra_reads.push(reads);
        }
        for (site, key) in extra_writes {
            let id = g.extra_id(&key);
            g.extra_writes.insert(site, id);
        }
        g
    }

    fn extra_id(&mut self, key: &str) -> u32 {
        if let Some(&id) = self.extra_ids.get(key) {
            return id;
        }
        let id = self.extra_reads.len() as u32;
        self.extra_ids.insert(key.to_string(), id);
        self.extra_reads.push(Vec::new());
        id
    }

    pub(crate) fn ctx(&self, m: NodeId) -> Option<&MethodCtx<'p>> {
        self.methods.get(m).and_then(Option::as_ref)
    }

    pub fn field_id(&self, field: &str) -> Option<u32> {
        self.field_ids.get(field).copied()
    }

    pub fn field_name(&self, id: u32) -> Option<&str> {
        self.field_ids.iter().find(|(_, &v)| v == id).map(|(k, _)| k.as_str())
    }

    pub fn extra_key_id(&self, key: &str) -> Option<u32> {
        self.extra_ids.get(key).copied()
    }

    pub fn extra_name(&self, id: u32) -> Option<&str> {
        self.extra_ids.iter().find(|(_, &v)| v == id).map(|(k, _)| k.as_str())
    }

    /// Extra keys read at `get*Extra` sites, with the reading method and index.
    pub fn extra_reads(&self) -> impl Iterator<Item = (&str, NodeId, usize)> + '_ {
        self.extra_ids
            .iter()
            .flat_map(move |(k, &id)| self.extra_reads[id as usize].iter().map(move |&(m, i)| (k.as_str(), m, i as usize)))
    }

    /// Facts holding right after instruction `i` for register `r`.
    pub fn after(&self, m: NodeId, i: usize, r: Reg) -> Vec<Fact> {
        self.ctx(m)
            .map(|c| c.succ[i].iter().map(|&s| Fact::Point { m, i: s, r }).collect())
            .unwrap_or_default()
    }

    /// Transfer relation: every fact directly implied by `fact`.
    pub fn successors(&self, fact: Fact) -> Vec<Fact> {
        match fact {
            Fact::Point { m, i, r } => self.point_successors(m, i as usize, r),
            Fact::Field(f) => self.field_reads[f as usize]
                .iter()
                .flat_map(|&(m, i, dst)| self.after(m, i as usize, dst))
                .collect(),
            Fact::Extra(k) => self.extra_reads[k as usize]
                .iter()
                .flat_map(|&(m, i)| {
                    let res = self.ctx(m).map(|c| c.result_reg()).unwrap_or(0);
                    self.after(m, i as usize, res)
                })
                .collect(),
            Fact::Return(m) => self.return_sites[m]
                .iter()
                .flat_map(|&(c, site)| {
                    let res = self.ctx(c).map(|x| x.result_reg()).unwrap_or(0);
                    self.after(c, site as usize, res)
                })
                .collect(),
        }
    }

    fn point_successors(&self, m: NodeId, i: usize, r: Reg) -> Vec<Fact> {
        let Some(ctx) = self.ctx(m) else { return Vec::new() };
        let Some(ins) = ctx.method.instructions.get(i) else { return Vec::new() };
        let op = &ins.op;
        let result = ctx.result_reg();
        let mut out = Vec::new();
        let mut regs_after: Vec<Reg> = Vec::new();

        if r == result {
            if let Op::MoveResult { dst, .. } = op {
                out.extend(self.after(m, i, *dst));
            }
            return out;
        }

        // exceptional exits carry the state from before the instruction
        out.extend(ctx.exc[i].iter().map(|&h| Fact::Point { m, i: h, r }));

        let defs = op.defs();
        if !defs.contains(&r) {
            regs_after.push(r);
        }
        match op {
            Op::Move { dst, src, .. } if *src == r => regs_after.push(*dst),
            Op::Unary { dst, src, .. } | Op::BinaryLit { dst, src, .. } if *src == r => regs_after.push(*dst),
            Op::Binary { dst, a, b, .. } if *a == r || *b == r => regs_after.push(*dst),
            Op::ArrayGet { dst, array, .. } if *array == r => regs_after.push(*dst),
            Op::ArrayPut { src, array, .. } if *src == r => regs_after.push(*array),
            Op::InstancePut { src, field, .. } | Op::StaticPut { src, field } if *src == r => {
                if let Some(f) = self.field_id(&field.to_string()) {
                    out.push(Fact::Field(f));
                }
            }
            Op::Return { src: Some(s) } if *s == r => out.push(Fact::Return(m)),
            Op::FilledNewArray { args, .. } if args.contains(&r) => regs_after.push(result),
            Op::Invoke { kind, args, method } if args.contains(&r) => {
                let slots = arg_slots(*kind, args, method);
                let default_site = Site { targets: Vec::new(), external: true };
                let site = self.sites.get(&(m, i as u32)).unwrap_or(&default_site);
                for &t in &site.targets {
                    let Some(callee) = self.ctx(t) else { continue };
                    if callee.method.instructions.is_empty() {
                        continue;
                    }
                    let params = callee.method.param_registers();
                    for (k, &a) in slots.iter().enumerate() {
                        if a == r {
                            if let Some(&p) = params.get(k) {
                                out.push(Fact::Point { m: t, i: 0, r: p });
                            }
                        }
                    }
                }
                if site.external || site.targets.is_empty() {
                    let pos = slots.iter().position(|&a| a == r);
                    if method.return_type != "V" && pos.is_some() {
                        regs_after.push(result);
                    }
                    if *kind != InvokeKind::Static {
                        let receiver_pos = slots.iter().skip(1).any(|&a| a == r);
                        if receiver_pos && into_receiver(self.program, method) {
                            regs_after.push(slots[0]);
                        }
                        if slots.first() == Some(&r) && is_read_into(method) {
                            if let Some(&buf) = slots.get(1) {
                                regs_after.push(buf);
                            }
                        }
                    }
                    if extra_put(method) && slots.get(2) == Some(&r) {
                        if let Some(&k) = self.extra_writes.get(&(m, i as u32)) {
                            out.push(Fact::Extra(k));
                        }
                    }
                }
            }
            _ => {}
        }
        regs_after.sort_unstable();
        regs_after.dedup();
        for reg in regs_after {
            out.extend(self.after(m, i, reg));
        }
        out
    }
}
