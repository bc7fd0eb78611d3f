use std::collections::BTreeSet;

use crate::dataflow::consts::AbsVal;
use crate::smali::{MethodKey, Op};
use crate::taxonomy::WeaknessType;

use super::{PatternHit, RuleContext, RuleGroup};

const HOSTNAME_VERIFIER: &str = "Ljavax/net/ssl/HostnameVerifier;";
const TRUST_MANAGERS: &[&str] = &["Ljavax/net/ssl/X509TrustManager;", "Ljavax/net/ssl/X509ExtendedTrustManager;"];
const PERMISSIVE_VERIFIERS: &[&str] = &[
    "Lorg/apache/http/conn/ssl/AllowAllHostnameVerifier;",
    "Lorg/apache/http/conn/ssl/NoopHostnameVerifier;",
    "Lokhttp3/internal/tls/AllowAllHostnameVerifier;",
];

pub(super) fn check_tls_authentication(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>) {
    // (a) library allow-all verifiers
    if ctx.options.enabled(RuleGroup::AllowAllHostname) {
        for (m, _, method) in ctx.methods() {
            for (i, ins) in method.instructions.iter().enumerate() {
                let evidence = match &ins.op {
                    Op::StaticGet { field, .. } if field.name == "ALLOW_ALL_HOSTNAME_VERIFIER" => Some(field.to_string()),
                    Op::StaticGet { field, .. } if PERMISSIVE_VERIFIERS.contains(&field.class.as_str()) => Some(field.to_string()),
                    Op::NewInstance { class, .. }
                        if PERMISSIVE_VERIFIERS.iter().any(|v| *v == class || ctx.program.is_subtype(class, v)) =>
                    {
                        Some(format!("new {class}"))
                    }
                    _ => None,
                };
                if let Some(e) = evidence {
                    out.push(ctx.hit(RuleGroup::AllowAllHostname, WeaknessType::AllowAllHostname, m, Some(i), e));
                }
            }
        }
    }

    for def in ctx.program.classes.values() {
        if def.is_interface() {
            continue;
        }
        let supers = ctx.program.supertypes(&def.name);
        // (b) custom verifier that accepts every host
        if ctx.options.enabled(RuleGroup::TrivialHostnameVerifier) && supers.iter().any(|t| t == HOSTNAME_VERIFIER) {
            if let Some(verify) = def.method("verify", "(Ljava/lang/String;Ljavax/net/ssl/SSLSession;)Z") {
                if returns_constant_true(ctx, def, verify) {
                    if let Some(m) = ctx.cg.node_id(&MethodKey::of(def, verify)) {
                        out.push(ctx.hit(
                            RuleGroup::TrivialHostnameVerifier,
                            WeaknessType::InvalidHostnameVerification,
                            m,
                            None,
                            format!("{}.verify always returns true", def.name),
                        ));
                    }
                }
            }
        }
        // (c) trust manager that never rejects a server chain
        if ctx.options.enabled(RuleGroup::TrivialServerTrust) && supers.iter().any(|t| TRUST_MANAGERS.contains(&t.as_str())) {
            for check in def.methods_named("checkServerTrusted") {
                if check.is_abstract() {
                    continue;
                }
                let key = MethodKey::of(def, check);
                if !may_reject(ctx, &key, &mut BTreeSet::new()) {
                    if let Some(m) = ctx.cg.node_id(&key) {
                        out.push(ctx.hit(
                            RuleGroup::TrivialServerTrust,
                            WeaknessType::InvalidServerVerification,
                            m,
                            None,
                            format!("{}.checkServerTrusted neither throws nor delegates", def.name),
                        ));
                    }
                }
            }
        }
    }
}

fn returns_constant_true(ctx: &RuleContext<'_, '_>, class: &crate::smali::ClassDef, method: &crate::smali::MethodDef) -> bool {
    let facts = ctx.consts(class, method);
    let mut returns = method.instructions.iter().enumerate().filter_map(|(i, ins)| match ins.op {
        Op::Return { src: Some(r) } => Some(facts.reg(i, r).clone()),
        _ => None,
    });
    let mut any = false;
    let all_true = returns.all(|v| {
        any = true;
        v == AbsVal::Int(1)
    });
    any && all_true
}

/// Whether a check method can reject: it throws, delegates to another
/// `checkServerTrusted`, or calls program code that can throw.
fn may_reject(ctx: &RuleContext<'_, '_>, key: &MethodKey, seen: &mut BTreeSet<MethodKey>) -> bool {
    if !seen.insert(key.clone()) {
        return false;
    }
    let Some(method) = ctx.program.method(key) else { return false };
    let Some(node) = ctx.cg.node_id(key) else { return false };
    for (i, ins) in method.instructions.iter().enumerate() {
        match &ins.op {
            Op::Throw { .. } => return true,
            Op::Invoke { method: r, .. } if r.name == "checkServerTrusted" || r.name == "checkValidity" || r.name == "verify" => {
                return true
            }
            Op::Invoke { .. } => {
                for t in ctx.cg.targets_at(node, i) {
                    let callee = ctx.cg.node(t);
                    if !callee.external && may_reject(ctx, &callee.method.clone(), seen) {
                        return true;
                    }
                }
            }
            _ => {}
        }
    }
    false
}
