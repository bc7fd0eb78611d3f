//! Random straight-line/branching smali programs and a brute-force
//! def-use enumerator that walks every control path of the generated
//! program, independently of the parsed IR.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bankscan::dataflow::consts::FieldConsts;
use bankscan::graph::build_call_graph;
use bankscan::resources::ManifestInfo;
use bankscan::smali::{parse_class, MethodKey, Op, SmaliProgram};
use bankscan::tagging::{Locus, SensitiveCategory, SourceLine, TaggedVariable};
use bankscan::taint::{forward_taint, SinkCatalog, Supergraph, TaintConfig};

pub const CLASS: &str = "Lcom/oracle/Gen;";
const REGS: u16 = 9;
/// Sink id of the `Log.i` inside the `leak` helper.
pub const LEAK: usize = usize::MAX;

#[derive(Debug, Clone)]
pub enum G {
    /// findViewById result; `tagged` views are sources.
    View { dst: u16, tagged: bool },
    Str { dst: u16 },
    Null { dst: u16 },
    Move { dst: u16, src: u16 },
    ToString { dst: u16, src: u16 },
    Concat { dst: u16, a: u16, b: u16 },
    /// StringBuilder.append: argument flows into the receiver.
    Append { sb: u16, src: u16 },
    Log { tag: u16, msg: u16 },
    Leak { src: u16 },
    Scrub { dst: u16, src: u16 },
    IfEqz { reg: u16, to: usize },
    Goto { to: usize },
}

#[derive(Debug, Clone)]
pub struct MiniProgram {
    pub seed: u64,
    pub ops: Vec<G>,
}

pub fn generate(seed: u64) -> MiniProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(20..=60);
    let mut ops = Vec::with_capacity(n);
    let mut jumps = 0;
    for i in 0..n {
        let r = |rng: &mut ChaCha8Rng| rng.gen_range(0..REGS);
        let pick = rng.gen_range(0..100);
        let op = match pick {
            0..=13 => G::View { dst: r(&mut rng), tagged: rng.gen_bool(0.8) },
            14..=19 => G::Str { dst: r(&mut rng) },
            20..=23 => G::Null { dst: r(&mut rng) },
            24..=36 => G::Move { dst: r(&mut rng), src: r(&mut rng) },
            37..=45 => G::ToString { dst: r(&mut rng), src: r(&mut rng) },
            46..=52 => G::Concat { dst: r(&mut rng), a: r(&mut rng), b: r(&mut rng) },
            53..=58 => G::Append { sb: r(&mut rng), src: r(&mut rng) },
            59..=73 => G::Log { tag: r(&mut rng), msg: r(&mut rng) },
            74..=78 => G::Leak { src: r(&mut rng) },
            79..=83 => G::Scrub { dst: r(&mut rng), src: r(&mut rng) },
            84..=93 if jumps < 10 => {
                jumps += 1;
                G::IfEqz { reg: r(&mut rng), to: rng.gen_range(i + 1..=n) }
            }
            _ if jumps < 10 => {
                jumps += 1;
                G::Goto { to: rng.gen_range(i + 1..=n) }
            }
            _ => G::Str { dst: r(&mut rng) },
        };
        ops.push(op);
    }
    MiniProgram { seed, ops }
}

impl MiniProgram {
    pub fn smali(&self) -> String {
        let targets: BTreeSet<usize> = self
            .ops
            .iter()
            .filter_map(|o| match o {
                G::IfEqz { to, .. } | G::Goto { to } => Some(*to),
                _ => None,
            })
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, ".class public {CLASS}\n.super Landroid/app/Activity;\n.source \"Gen.java\"\n");
        let _ = writeln!(s, ".method public run()V\n    .locals {REGS}");
        for (i, op) in self.ops.iter().enumerate() {
            if targets.contains(&i) {
                let _ = writeln!(s, "    :L{i}");
            }
            let line = match op {
                G::View { dst, tagged } => {
                    let id = if *tagged { 0x7f0a0001 } else { 0x7f0a0002 };
                    format!(
                        "    const v{dst}, {id:#x}\n    invoke-virtual {{p0, v{dst}}}, {CLASS}->findViewById(I)Landroid/view/View;\n    move-result-object v{dst}"
                    )
                }
                G::Str { dst } => format!("    const-string v{dst}, \"s{i}\""),
                G::Null { dst } => format!("    const/4 v{dst}, 0x0"),
                G::Move { dst, src } => format!("    move-object v{dst}, v{src}"),
                G::ToString { dst, src } => format!(
                    "    invoke-virtual {{v{src}}}, Ljava/lang/Object;->toString()Ljava/lang/String;\n    move-result-object v{dst}"
                ),
                G::Concat { dst, a, b } => format!(
                    "    invoke-virtual {{v{a}, v{b}}}, Ljava/lang/String;->concat(Ljava/lang/String;)Ljava/lang/String;\n    move-result-object v{dst}"
                ),
                G::Append { sb, src } => format!(
                    "    invoke-virtual {{v{sb}, v{src}}}, Ljava/lang/StringBuilder;->append(Ljava/lang/String;)Ljava/lang/StringBuilder;"
                ),
                G::Log { tag, msg } => {
                    format!("    invoke-static {{v{tag}, v{msg}}}, Landroid/util/Log;->d(Ljava/lang/String;Ljava/lang/String;)I")
                }
                G::Leak { src } => format!("    invoke-static {{v{src}}}, {CLASS}->leak(Ljava/lang/String;)V"),
                G::Scrub { dst, src } => format!(
                    "    invoke-static {{v{src}}}, {CLASS}->scrub(Ljava/lang/String;)Ljava/lang/String;\n    move-result-object v{dst}"
                ),
                G::IfEqz { reg, to } => format!("    if-eqz v{reg}, :L{to}"),
                G::Goto { to } => format!("    goto :L{to}"),
            };
            let _ = writeln!(s, "{line}");
        }
        if targets.contains(&self.ops.len()) {
            let _ = writeln!(s, "    :L{}", self.ops.len());
        }
        s.push_str("    return-void\n.end method\n\n");
        s.push_str(
            ".method static leak(Ljava/lang/String;)V\n    .locals 1\n    const-string v0, \"leak\"\n    invoke-static {v0, p0}, Landroid/util/Log;->i(Ljava/lang/String;Ljava/lang/String;)I\n    return-void\n.end method\n\n",
        );
        s.push_str(
            ".method static scrub(Ljava/lang/String;)Ljava/lang/String;\n    .locals 1\n    const-string v0, \"***\"\n    return-object v0\n.end method\n",
        );
        s
    }

    /// Tagged view lookups in program order; source k is the k-th one.
    fn source_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, G::View { tagged: true, .. })).count()
    }

    /// Every (source, sink) pair connected along some control path. Sinks in
    /// `run` are numbered by their order among the `Log` ops.
    pub fn oracle(&self) -> BTreeSet<(usize, usize)> {
        let mut source_of = vec![None; self.ops.len()];
        let mut sink_of = vec![None; self.ops.len()];
        let (mut s, mut k) = (0, 0);
        for (i, o) in self.ops.iter().enumerate() {
            match o {
                G::View { tagged: true, .. } => {
                    source_of[i] = Some(s);
                    s += 1;
                }
                G::Log { .. } => {
                    sink_of[i] = Some(k);
                    k += 1;
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        let state = vec![BTreeSet::new(); REGS as usize];
        self.walk(0, state, &source_of, &sink_of, &mut out);
        out
    }

    fn walk(
        &self,
        mut pc: usize,
        mut regs: Vec<BTreeSet<usize>>,
        source_of: &[Option<usize>],
        sink_of: &[Option<usize>],
        out: &mut BTreeSet<(usize, usize)>,
    ) {
        while let Some(op) = self.ops.get(pc) {
            let r = |x: &u16| *x as usize;
            match op {
                G::View { dst, .. } => {
                    regs[r(dst)] = source_of[pc].into_iter().collect();
                }
                G::Str { dst } | G::Null { dst } | G::Scrub { dst, .. } => regs[r(dst)].clear(),
                G::Move { dst, src } | G::ToString { dst, src } => regs[r(dst)] = regs[r(src)].clone(),
                G::Concat { dst, a, b } => {
                    regs[r(dst)] = regs[r(a)].union(&regs[r(b)]).copied().collect();
                }
                G::Append { sb, src } => {
                    let add = regs[r(src)].clone();
                    regs[r(sb)].extend(add);
                }
                G::Log { msg, .. } => {
                    let k = sink_of[pc].unwrap();
                    out.extend(regs[r(msg)].iter().map(|&s| (s, k)));
                }
                G::Leak { src } => out.extend(regs[r(src)].iter().map(|&s| (s, LEAK))),
                G::IfEqz { to, .. } => {
                    self.walk(*to, regs.clone(), source_of, sink_of, out);
                }
                G::Goto { to } => {
                    pc = *to;
                    continue;
                }
            }
            pc += 1;
        }
    }

    /// Runs the engine on the rendered program and maps flows to the
    /// oracle's (source, sink) numbering.
    pub fn engine(&self) -> BTreeSet<(usize, usize)> {
        let class = parse_class(&self.smali()).unwrap_or_else(|e| panic!("seed {}: {e}", self.seed));
        let p = SmaliProgram::from_classes([class]);
        let c = p.class(CLASS).unwrap();
        let run = c.methods_named("run").next().unwrap();
        let mut sources = Vec::new();
        let mut sink_ids = Vec::new();
        for (i, ins) in run.instructions.iter().enumerate() {
            let Some((_, _, m)) = ins.op.as_invoke() else { continue };
            if m.name == "d" && m.class == "Landroid/util/Log;" {
                sink_ids.push(i);
            }
            if m.name != "findViewById" {
                continue;
            }
            let Op::Const { value, .. } = &run.instructions[i - 1].op else { panic!("no const before lookup") };
            if *value != 0x7f0a0001 {
                continue;
            }
            let Op::MoveResult { dst, .. } = run.instructions[i + 1].op else { panic!("no move-result") };
            sources.push(TaggedVariable {
                method: MethodKey::of(c, run),
                locus: Locus::Register { reg: dst, at: i + 1 },
                keyword: "password".into(),
                category: SensitiveCategory::Credential,
                view_id: "et_password".into(),
                binding_site: SourceLine { file: c.display_path(), line: 0, java_line: None },
                result_index: i + 1,
                result_reg: dst,
            });
        }
        assert_eq!(sources.len(), self.source_count());
        let cg = build_call_graph(&p, &ManifestInfo::default());
        let fields = FieldConsts::compute(&p);
        let g = Supergraph::build(&p, &cg, &fields);
        let out = forward_taint(g, &sources, &SinkCatalog::builtin(), &fields, TaintConfig::default());
        out.flows
            .iter()
            .map(|f| {
                let sink = match f.sink_method.name.as_str() {
                    "run" => sink_ids.iter().position(|&i| i == f.sink_index).expect("flow ends at a generated sink"),
                    "leak" => LEAK,
                    other => panic!("unexpected sink method {other}"),
                };
                (f.source_index(), sink)
            })
            .collect()
    }

    pub fn instruction_count(&self) -> usize {
        let class = parse_class(&self.smali()).unwrap();
        class.methods.iter().map(|m| m.instructions.len()).sum()
    }
}
