use std::collections::BTreeMap;

use crate::dataflow::consts::AbsVal;
use crate::graph::callgraph::LIFECYCLE;
use crate::smali::{arg_slots, ComponentKind, MethodKey};
use crate::taxonomy::WeaknessType;

use super::{PatternHit, RuleContext, RuleGroup};

pub const FLAG_SECURE: i64 = 0x2000;

fn hosted_by(activity: &str, class: &str) -> bool {
    class == activity || class.strip_suffix(';').zip(activity.strip_suffix(';')).is_some_and(|(c, a)| c.starts_with(&format!("{a}$")))
}

/// Activities that display sensitive views but never set `FLAG_SECURE`.
pub(super) fn check_screenshot(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>) {
    let cats = &ctx.options.screenshot_categories;
    for activity in ctx.program.classes.values().filter(|c| c.component == ComponentKind::Activity && !c.is_abstract()) {
        let mut shown: BTreeMap<&str, &str> = BTreeMap::new();
        for t in ctx.tagged.iter().filter(|t| cats.contains(&t.category) && hosted_by(&activity.name, &t.method.class)) {
            shown.entry(t.view_id.as_str()).or_insert(t.keyword.as_str());
        }
        if shown.is_empty() || sets_flag_secure(ctx, &activity.name) {
            continue;
        }
        let site = ["onCreate"]
            .iter()
            .chain(LIFECYCLE)
            .flat_map(|n| activity.methods_named(n))
            .find_map(|m| ctx.cg.node_id(&MethodKey::of(activity, m)));
        let Some(site) = site else { continue };
        let views = shown.iter().map(|(v, k)| format!("{v} ({k})")).collect::<Vec<_>>().join(", ");
        out.push(ctx.hit(
            RuleGroup::Screenshot,
            WeaknessType::Screenshot,
            site,
            None,
            format!("sensitive views without FLAG_SECURE: {views}"),
        ));
    }
}

/// Any method of the activity or its program superclasses passes a constant
/// with the secure bit to `setFlags` or `addFlags`.
fn sets_flag_secure(ctx: &RuleContext<'_, '_>, activity: &str) -> bool {
    let mut chain = vec![activity.to_string()];
    chain.extend(ctx.program.superclass_chain(activity));
    for name in chain {
        let Some(class) = ctx.program.class(&name) else { continue };
        for method in &class.methods {
            let calls = method.instructions.iter().any(|i| {
                i.op.as_invoke().is_some_and(|(_, _, r)| r.name == "setFlags" || r.name == "addFlags")
            });
            if !calls {
                continue;
            }
            let facts = ctx.consts(class, method);
            for (i, ins) in method.instructions.iter().enumerate() {
                let Some((kind, args, r)) = ins.op.as_invoke() else { continue };
                if r.name != "setFlags" && r.name != "addFlags" {
                    continue;
                }
                let slots = arg_slots(kind, args, r);
                if let Some(&flag) = slots.get(1) {
                    if let AbsVal::Int(v) = facts.reg(i, flag) {
                        if v & FLAG_SECURE != 0 {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::hosted_by;

    #[test]
    fn inner_classes_are_hosted() {
        assert!(hosted_by("Lcom/b/Login;", "Lcom/b/Login;"));
        assert!(hosted_by("Lcom/b/Login;", "Lcom/b/Login$1;"));
        assert!(!hosted_by("Lcom/b/Login;", "Lcom/b/LoginHelper;"));
    }
}
