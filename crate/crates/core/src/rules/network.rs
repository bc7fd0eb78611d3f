use crate::smali::{arg_slots, Literal, Op};
use crate::taint::Marker;
use crate::taxonomy::WeaknessType;

use super::{PatternHit, RuleContext, RuleGroup};

/// Calls that open a connection to a URL held by the receiver or an argument.
const OPENERS: &[(&str, &str)] = &[
    ("Ljava/net/URL;", "openConnection"),
    ("Ljava/net/URL;", "openStream"),
    ("Lorg/apache/http/client/methods/HttpGet;", "<init>"),
    ("Lorg/apache/http/client/methods/HttpPost;", "<init>"),
    ("Lorg/apache/http/client/methods/HttpPut;", "<init>"),
    ("Lorg/apache/http/client/methods/HttpDelete;", "<init>"),
    ("Lokhttp3/Request$Builder;", "url"),
    ("Lcom/android/volley/toolbox/StringRequest;", "<init>"),
    ("Lcom/android/volley/toolbox/JsonObjectRequest;", "<init>"),
];

fn has_https_literal(ctx: &RuleContext<'_, '_>) -> bool {
    let https = |s: &str| s.to_ascii_lowercase().starts_with("https://");
    ctx.program.classes.values().any(|c| {
        c.fields.iter().any(|f| matches!(&f.initial, Some(Literal::Str(s)) if https(s)))
            || c.methods.iter().any(|m| {
                m.instructions
                    .iter()
                    .any(|i| matches!(&i.op, Op::ConstString { value, .. } if https(value)))
            })
    })
}

/// `http://` URLs reach a connection call and no `https://` literal exists.
pub(super) fn check_http_only(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>) {
    if has_https_literal(ctx) {
        return;
    }
    for (m, _, method) in ctx.methods() {
        for (i, ins) in method.instructions.iter().enumerate() {
            let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
            if !OPENERS.iter().any(|(c, n)| ctx.is_call(mref, c, n)) {
                continue;
            }
            let slots = arg_slots(kind, args, mref);
            if slots.iter().any(|&r| ctx.taint.marker_at(Marker::HttpUrl, m, i, r)) {
                out.push(ctx.hit(
                    RuleGroup::HttpOnly,
                    WeaknessType::HttpOnly,
                    m,
                    Some(i),
                    format!("plain http URL opened via {}", mref.name),
                ));
            }
        }
    }
}
