use crate::graph::NodeId;
use crate::smali::MethodKey;
use crate::taxonomy::WeaknessType;

use super::{sensitive_key, Advisory, AdvisoryKind, PatternHit, RuleContext, RuleGroup};

fn in_class(class: &str, owner: &str) -> bool {
    owner == class || owner.strip_suffix(';').zip(class.strip_suffix(';')).is_some_and(|(o, c)| o.starts_with(&format!("{c}$")))
}

/// First extra read inside `class` whose key carries sensitive data, either
/// because a tagged source flows into that key or because the key is named
/// like one.
fn sensitive_extra_read(ctx: &RuleContext<'_, '_>, class: &str) -> Option<(NodeId, usize, String)> {
    let mut reads: Vec<_> = ctx
        .taint
        .graph
        .extra_reads()
        .filter(|(_, m, _)| in_class(class, &ctx.cg.node(*m).method.class))
        .collect();
    reads.sort_by_key(|&(k, m, i)| (m, i, k));
    reads.into_iter().find_map(|(key, m, i)| {
        if !ctx.taint.sources_in_extra(key).is_empty() {
            Some((m, i, format!("reads extra \"{key}\" that carries sensitive input")))
        } else {
            sensitive_key(ctx.catalog, key).map(|c| (m, i, format!("reads {c} extra \"{key}\"")))
        }
    })
}

fn first_node(ctx: &RuleContext<'_, '_>, class: &str) -> Option<NodeId> {
    let def = ctx.program.class(class)?;
    def.methods.iter().find_map(|m| ctx.cg.node_id(&MethodKey::of(def, m)))
}

/// Dynamically registered receivers and exported components that consume
/// sensitive intent extras.
pub(super) fn check_icc_surface(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>, adv: &mut Vec<Advisory>) {
    if ctx.options.enabled(RuleGroup::IccDynamicReceiver) {
        let mut done = std::collections::BTreeSet::new();
        for r in &ctx.entries.dynamic_receivers {
            if ctx.program.class(&r.class).is_none() || !done.insert(r.class.as_str()) {
                continue;
            }
            match sensitive_extra_read(ctx, &r.class) {
                Some((m, i, e)) => out.push(ctx.hit(RuleGroup::IccDynamicReceiver, WeaknessType::IccDynamicReceiver, m, Some(i), e)),
                None => {
                    if let Some(site) = ctx.cg.node_id(&r.registered_in) {
                        adv.push(ctx.advisory(
                            AdvisoryKind::Informational,
                            "icc_dynamic_receiver",
                            site,
                            Some(r.site),
                            format!("{} is registered at runtime", r.class),
                        ));
                    }
                }
            }
        }
    }
    if ctx.options.enabled(RuleGroup::IccComponentExport) {
        for c in ctx.manifest.components.iter().filter(|c| c.exported) {
            if ctx.program.class(&c.class).is_none() {
                continue;
            }
            match sensitive_extra_read(ctx, &c.class) {
                Some((m, i, e)) => out.push(ctx.hit(RuleGroup::IccComponentExport, WeaknessType::IccComponentExport, m, Some(i), e)),
                None => {
                    if let Some(site) = first_node(ctx, &c.class) {
                        adv.push(ctx.advisory(
                            AdvisoryKind::Informational,
                            "icc_component_export",
                            site,
                            None,
                            format!("{} is exported", c.class),
                        ));
                    }
                }
            }
        }
    }
}
