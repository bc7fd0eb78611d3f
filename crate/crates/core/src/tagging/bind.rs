use std::collections::BTreeMap;

use serde::Serialize;

use super::catalog::SensitiveCategory;
use super::TaggedView;
use crate::dataflow::consts::{ConstFacts, FieldConsts};
use crate::error::Diagnostic;
use crate::resources::RTable;
use crate::smali::{FieldRef, MethodKey, Op, Reg, SmaliProgram};

/// Where a tagged value lives in code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Locus {
    /// Register defined by the `move-result` at instruction `at`.
    Register { reg: Reg, at: usize },
    /// Field the view is stored into right after lookup.
    Field { field: String },
}

/// File position of an instruction, for evidence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceLine {
    pub file: String,
    pub line: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub java_line: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TaggedVariable {
    pub method: MethodKey,
    pub locus: Locus,
    pub keyword: String,
    pub category: SensitiveCategory,
    pub view_id: String,
    /// The `findViewById` call.
    pub binding_site: SourceLine,
    /// Index of the `move-result` receiving the view; taint starts here.
    pub result_index: usize,
    pub result_reg: Reg,
}

/// Binds `findViewById(<const id>)` results to tagged views.
pub fn bind_variables(
    program: &SmaliProgram,
    tagged: &[TaggedView],
    rtable: &RTable,
    fields: &FieldConsts,
    diags: &mut Vec<Diagnostic>,
) -> Vec<TaggedVariable> {
    // first tag per resource id wins (layout files are visited in path order)
    let mut by_id: BTreeMap<&str, &TaggedView> = BTreeMap::new();
    for t in tagged {
        by_id.entry(t.resource_id.as_str()).or_insert(t);
    }
    let mut out = Vec::new();
    for (class, method) in program.methods() {
        let sites: Vec<usize> = method
            .instructions
            .iter()
            .enumerate()
            .filter(|(_, i)| matches!(&i.op, Op::Invoke { method: m, .. } if m.name == "findViewById" && m.parameters == ["I"]))
            .map(|(k, _)| k)
            .collect();
        if sites.is_empty() {
            continue;
        }
        let facts = ConstFacts::analyze(class, method, fields);
        for i in sites {
            let Op::Invoke { args, .. } = &method.instructions[i].op else { continue };
            let Some(&id_reg) = args.last() else { continue };
            let site = SourceLine {
                file: class.display_path(),
                line: method.instructions[i].file_line,
                java_line: method.instructions[i].java_line,
            };
            let Some(id) = facts.reg(i, id_reg).as_int() else { continue };
            let Some((ty, name)) = rtable.name_of(id) else {
                if (id >> 24) == 0x7f {
                    diags.push(Diagnostic::new(
                        "tagging",
                        format!("{}:{}", site.file, site.line),
                        format!("resource id {id:#x} does not resolve"),
                    ));
                }
                continue;
            };
            if ty != "id" {
                continue;
            }
            let Some(view) = by_id.get(name) else { continue };
            let Some(Op::MoveResult { dst, .. }) = method.instructions.get(i + 1).map(|x| &x.op) else {
                continue;
            };
            let locus = field_locus(&method.instructions[i + 2..], *dst)
                .map(|f| Locus::Field { field: f.to_string() })
                .unwrap_or(Locus::Register { reg: *dst, at: i + 1 });
            out.push(TaggedVariable {
                method: MethodKey::of(class, method),
                locus,
                keyword: view.keyword.clone(),
                category: view.category,
                view_id: name.to_string(),
                binding_site: site,
                result_index: i + 1,
                result_reg: *dst,
            });
        }
    }
    out.sort();
    out
}

/// Follows `check-cast` / `move-object` right after the lookup to an
/// `iput`/`sput` of the same value.
fn field_locus(rest: &[crate::smali::Instruction], reg: Reg) -> Option<&FieldRef> {
    let mut cur = reg;
    for ins in rest.iter().take(4) {
        match &ins.op {
            Op::CheckCast { reg, .. } if *reg == cur => {}
            Op::Move { dst, src, .. } if *src == cur => cur = *dst,
            Op::InstancePut { src, field, .. } | Op::StaticPut { src, field } if *src == cur => return Some(field),
            _ => return None,
        }
    }
    None
}
