use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::smali::{types, InvokeKind, MethodRef, SmaliProgram};
use crate::taxonomy::{Category, WeaknessType};

pub const BUILTIN_SINKS: &str = include_str!("../../data/sinks.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkSpec {
    pub class: String,
    pub method: String,
    /// Full descriptor, or `None` for any overload.
    pub signature: Option<String>,
    /// 0 is the receiver, 1.. the parameters.
    pub tainted_args: Vec<usize>,
    pub weakness: WeaknessType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SinkCatalog {
    entries: Vec<SinkSpec>,
}

impl SinkCatalog {
    pub fn builtin() -> SinkCatalog {
        Self::parse(BUILTIN_SINKS, "<builtin sinks>").expect("builtin sink table is well-formed")
    }

    pub fn from_file(path: &Path) -> Result<SinkCatalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<SinkCatalog> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Catalog { path: origin.to_string(), line: n + 1, message };
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let [class, method, signature, args, weakness, category] = cols[..] else {
                return Err(err(format!("expected 6 `|`-separated columns, found {}", cols.len())));
            };
            if !types::is_class_descriptor(class) {
                return Err(err(format!("bad class descriptor `{class}`")));
            }
            if method.is_empty() {
                return Err(err("empty method name".into()));
            }
            let signature = match signature {
                "*" => None,
                s if s.starts_with('(') && types::parse_method_descriptor(s).is_some() => Some(s.to_string()),
                s => return Err(err(format!("bad signature `{s}`"))),
            };
            let tainted_args = args
                .split(',')
                .map(|a| a.trim().parse::<usize>().map_err(|_| err(format!("bad argument position `{a}`"))))
                .collect::<Result<Vec<_>>>()?;
            let weakness: WeaknessType = weakness.parse().map_err(err)?;
            let category: Category = category.parse().map_err(err)?;
            if !matches!(weakness.category(), Category::C2 | Category::C3) {
                return Err(err(format!("`{}` is not a storage or transmission weakness", weakness.name())));
            }
            if weakness.category() != category {
                return Err(err(format!("`{}` belongs to {:?}, not {category:?}", weakness.name(), weakness.category())));
            }
            entries.push(SinkSpec {
                class: class.to_string(),
                method: method.to_string(),
                signature,
                tainted_args,
                weakness,
            });
        }
        Ok(SinkCatalog { entries })
    }

    pub fn entries(&self) -> &[SinkSpec] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Specs matching a call; the receiver's declared type may be a
    /// program subclass of the spec's class.
    pub fn matching<'a>(&'a self, program: &SmaliProgram, method: &MethodRef) -> Vec<&'a SinkSpec> {
        let mut supers: Option<Vec<String>> = None;
        let desc = method.descriptor();
        self.entries
            .iter()
            .filter(|s| s.method == method.name && s.signature.as_deref().is_none_or(|sig| sig == desc))
            .filter(|s| {
                if s.class == method.class {
                    return true;
                }
                let sup = supers.get_or_insert_with(|| receiver_supertypes(program, &method.class));
                sup.contains(&s.class)
            })
            .collect()
    }
}

const CONTEXT_BASES: &[&str] = &[
    "Landroid/app/Activity;",
    "Landroid/app/Service;",
    "Landroid/app/Application;",
    "Landroid/content/ContextWrapper;",
    "Landroid/view/ContextThemeWrapper;",
];

/// Program supertypes plus the framework ancestors that matter for sinks.
fn receiver_supertypes(program: &SmaliProgram, class: &str) -> Vec<String> {
    let mut out = program.supertypes(class);
    let external: Vec<String> = out.iter().filter(|t| program.class(t).is_none()).cloned().collect();
    let is_activity = program.class(class).is_some_and(|c| c.component == crate::smali::ComponentKind::Activity)
        || external.iter().any(|t| t.ends_with("Activity;"));
    if is_activity {
        out.push("Landroid/app/Activity;".into());
    }
    if is_activity
        || external.iter().any(|t| CONTEXT_BASES.contains(&t.as_str()))
        || program.class(class).is_some_and(|c| c.component.is_component())
    {
        out.push("Landroid/content/Context;".into());
    }
    out
}

/// Register of a sink argument position at an invoke, if present.
pub fn position_register(kind: InvokeKind, slots: &[crate::smali::Reg], position: usize) -> Option<crate::smali::Reg> {
    if kind == InvokeKind::Static {
        position.checked_sub(1).and_then(|p| slots.get(p).copied())
    } else {
        slots.get(position).copied()
    }
}
