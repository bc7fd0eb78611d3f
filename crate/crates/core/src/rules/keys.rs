use crate::smali::arg_slots;
use crate::taxonomy::WeaknessType;

use super::{Advisory, AdvisoryKind, Location, PatternHit, RuleContext, RuleGroup};

const CIPHER: &str = "Ljavax/crypto/Cipher;";

/// Literal key/IV material reaching a cipher that processes sensitive data,
/// plus private keys shipped in the package.
pub(super) fn detect_hardcoded_keys(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>, adv: &mut Vec<Advisory>) {
    let taint = ctx.taint;
    for (c, cand) in taint.key_candidates.iter().enumerate() {
        let Some(site) = ctx.cg.node_id(&cand.method) else { continue };
        let mut confirmed = None;
        'search: for (m, _, method) in ctx.methods() {
            for (i, ins) in method.instructions.iter().enumerate() {
                let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
                if mref.class != CIPHER || !(mref.name == "doFinal" || mref.name == "update") {
                    continue;
                }
                let slots = arg_slots(kind, args, mref);
                if !taint.key_object_at(c, m, i, slots[0]) {
                    continue;
                }
                if slots.iter().skip(1).any(|&r| !taint.sources_at(m, i, r).is_empty()) {
                    confirmed = Some((m, i));
                    break 'search;
                }
            }
        }
        let literal = cand.literal.as_deref().map(|l| format!(" \"{l}\"")).unwrap_or_default();
        match confirmed {
            Some(_) => out.push(ctx.hit(
                RuleGroup::HardcodedKey,
                WeaknessType::HardcodedKey,
                site,
                Some(cand.index),
                format!("literal{literal} used as {} for a cipher over sensitive data", cand.constructor),
            )),
            None if ctx.options.strict_keys => out.push(ctx.hit(
                RuleGroup::HardcodedKey,
                WeaknessType::HardcodedKey,
                site,
                Some(cand.index),
                format!("literal{literal} used as {}", cand.constructor),
            )),
            None => adv.push(ctx.advisory(
                AdvisoryKind::Informational,
                "hardcoded_key",
                site,
                Some(cand.index),
                format!("literal{literal} used as {} but no sensitive data is encrypted with it", cand.constructor),
            )),
        }
    }
    for k in &ctx.package_files.private_keys {
        out.push(PatternHit {
            group: RuleGroup::HardcodedKey,
            weakness: WeaknessType::HardcodedKey,
            location: Location::file(&k.source),
            evidence: format!("embedded {} block", k.label),
            reachability: None,
            site: None,
        });
    }
}
