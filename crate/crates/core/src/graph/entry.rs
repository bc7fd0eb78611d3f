use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::callgraph::{CallGraph, NodeId, LIFECYCLE};
use crate::dataflow::consts::{ConstFacts, FieldConsts};
use crate::resources::{Layout, ManifestInfo};
use crate::smali::{arg_slots, ComponentKind, MethodKey, SmaliProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// Lifecycle callbacks and broadcast delivery.
    SystemEvent,
    /// UI listeners and layout click handlers.
    UserInput,
}

/// A broadcast receiver registered at run time with `registerReceiver`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DynamicReceiver {
    pub class: String,
    pub registered_in: MethodKey,
    pub site: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EntryPoints {
    pub entries: BTreeMap<NodeId, EntryKind>,
    pub dynamic_receivers: Vec<DynamicReceiver>,
}

impl EntryPoints {
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.contains_key(&id)
    }

    fn add(&mut self, id: NodeId, kind: EntryKind) {
        // system events take precedence when both apply
        let e = self.entries.entry(id).or_insert(kind);
        if kind == EntryKind::SystemEvent {
            *e = kind;
        }
    }
}

fn is_handler_name(name: &str) -> bool {
    ["on", "after", "before"].iter().any(|p| {
        name.strip_prefix(p)
            .and_then(|rest| rest.chars().next())
            .is_some_and(|c| c.is_uppercase())
    })
}

fn is_listener_registration(name: &str) -> bool {
    (name.starts_with("set") || name.starts_with("add")) && (name.ends_with("Listener") || name.ends_with("Watcher"))
        || name.starts_with("setOn")
}

/// Collects entry points: manifest components' lifecycle methods, the
/// application class, dynamically registered receivers, UI listeners and
/// layout `android:onClick` handlers.
pub fn find_entry_points(
    program: &SmaliProgram,
    manifest: &ManifestInfo,
    layouts: &[Layout],
    cg: &CallGraph,
    fields: &FieldConsts,
) -> EntryPoints {
    let mut ep = EntryPoints::default();
    let node = |class: &str, name: &str, desc: &str| cg.node_id(&MethodKey::new(class, name, desc));

    let add_lifecycle = |ep: &mut EntryPoints, class: &str| {
        let Some(def) = program.class(class) else { return };
        for m in &def.methods {
            if LIFECYCLE.contains(&m.name.as_str()) {
                if let Some(id) = node(class, &m.name, &m.descriptor) {
                    ep.add(id, EntryKind::SystemEvent);
                }
            }
        }
    };

    for c in &manifest.components {
        add_lifecycle(&mut ep, &c.class);
    }
    if let Some(app) = &manifest.application_class {
        if let Some(def) = program.class(app) {
            for m in def.methods.iter().filter(|m| m.name == "onCreate" || m.name == "attachBaseContext") {
                if let Some(id) = node(app, &m.name, &m.descriptor) {
                    ep.add(id, EntryKind::SystemEvent);
                }
            }
        }
    }

    let mut listener_types = BTreeSet::new();
    for (class, method) in program.methods() {
        let relevant = method.instructions.iter().any(|i| {
            i.op.as_invoke()
                .is_some_and(|(_, _, m)| m.name == "registerReceiver" || is_listener_registration(&m.name))
        });
        if !relevant {
            continue;
        }
        let facts = ConstFacts::analyze(class, method, fields);
        for (i, ins) in method.instructions.iter().enumerate() {
            let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
            let slots = arg_slots(kind, args, mref);
            let skip = usize::from(kind != crate::smali::InvokeKind::Static);
            if mref.name == "registerReceiver" {
                let Some(&r) = slots.get(skip) else { continue };
                let Some(ty) = facts.reg(i, r).type_name() else { continue };
                let ty = ty.to_string();
                if program.class(&ty).is_some_and(|d| d.component == ComponentKind::Receiver) {
                    for m in program.class(&ty).into_iter().flat_map(|d| d.methods_named("onReceive")) {
                        if let Some(id) = node(&ty, &m.name, &m.descriptor) {
                            ep.add(id, EntryKind::SystemEvent);
                        }
                    }
                    ep.dynamic_receivers.push(DynamicReceiver {
                        class: ty,
                        registered_in: MethodKey::of(class, method),
                        site: i,
                    });
                }
            } else if is_listener_registration(&mref.name) {
                for &r in slots.iter().skip(skip) {
                    if let Some(ty) = facts.reg(i, r).type_name() {
                        if program.class(ty).is_some() {
                            listener_types.insert(ty.to_string());
                        }
                    }
                }
            }
        }
    }

    // classes implementing framework listener/watcher interfaces
    for def in program.classes.values() {
        let implements_listener = program
            .supertypes(&def.name)
            .iter()
            .any(|t| program.class(t).is_none() && (t.ends_with("Listener;") || t.ends_with("Watcher;")));
        if implements_listener {
            listener_types.insert(def.name.clone());
        }
    }
    for ty in &listener_types {
        let Some(def) = program.class(ty) else { continue };
        for m in def.methods.iter().filter(|m| !m.is_static() && is_handler_name(&m.name)) {
            if let Some(id) = node(ty, &m.name, &m.descriptor) {
                ep.add(id, EntryKind::UserInput);
            }
        }
    }

    let handlers: BTreeSet<&str> = layouts.iter().flat_map(|l| l.click_handlers.iter().map(String::as_str)).collect();
    for def in program.classes.values().filter(|d| d.component == ComponentKind::Activity) {
        for h in &handlers {
            if let Some(k) = program.find_method_in_chain(&def.name, h, "(Landroid/view/View;)V") {
                if let Some(id) = cg.node_id(&k) {
                    ep.add(id, EntryKind::UserInput);
                }
            }
        }
    }

    ep.dynamic_receivers.sort();
    ep.dynamic_receivers.dedup();
    ep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handler_names() {
        assert!(is_handler_name("onClick"));
        assert!(is_handler_name("afterTextChanged"));
        assert!(!is_handler_name("online"));
        assert!(!is_handler_name("beforehand"));
        assert!(is_listener_registration("setOnClickListener"));
        assert!(is_listener_registration("addTextChangedListener"));
        assert!(!is_listener_registration("setText"));
    }
}
