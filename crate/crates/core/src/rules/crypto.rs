use crate::dataflow::consts::AbsVal;
use crate::smali::{arg_slots, InvokeKind, Op};
use crate::taint::Marker;
use crate::taxonomy::WeaknessType;

use super::{Advisory, AdvisoryKind, PatternHit, RuleContext, RuleGroup};

const CIPHER: &str = "Ljavax/crypto/Cipher;";

/// Parsed `algorithm/mode/padding`. Missing parts are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformation {
    pub algorithm: String,
    pub mode: Option<String>,
    pub padding: Option<String>,
}

impl Transformation {
    pub fn parse(s: &str) -> Transformation {
        let mut parts = s.split('/').map(|p| p.trim().to_ascii_uppercase());
        let algorithm = parts.next().unwrap_or_default();
        let mode = parts.next().filter(|p| !p.is_empty());
        let padding = parts.next().filter(|p| !p.is_empty());
        Transformation { algorithm, mode, padding }
    }
}

/// Weaknesses of a constant cipher transformation.
///
/// Bare `AES` defaults to ECB with PKCS5 padding and bare `RSA` to PKCS#1
/// v1.5 padding on common providers, so both count as their defaults.
pub fn classify_transformation(t: &str) -> Vec<WeaknessType> {
    let t = Transformation::parse(t);
    let mut out = Vec::new();
    match t.algorithm.as_str() {
        "DES" | "BLOWFISH" => out.push(WeaknessType::InsecureDesBlowfish),
        "AES" | "AES_128" | "AES_256" => {
            let mode = t.mode.as_deref().unwrap_or("ECB");
            if mode == "ECB" {
                out.push(WeaknessType::AesEcbMode);
            }
            if t.padding.as_deref() == Some("NOPADDING") && matches!(mode, "ECB" | "CBC" | "PCBC") {
                out.push(WeaknessType::AesNoPadding);
            }
        }
        "RSA" => match t.padding.as_deref() {
            None | Some("NOPADDING") | Some("PKCS1PADDING") => out.push(WeaknessType::RsaImproperPadding),
            _ => {}
        },
        _ => {}
    }
    out
}

pub fn is_insecure_hash(alg: &str) -> bool {
    matches!(alg.trim().to_ascii_uppercase().as_str(), "MD5" | "MD4" | "MD2" | "SHA-1" | "SHA1" | "SHA")
}

fn group_of(w: WeaknessType) -> RuleGroup {
    match w {
        WeaknessType::InsecureDesBlowfish => RuleGroup::DesBlowfish,
        WeaknessType::AesEcbMode | WeaknessType::AesNoPadding => RuleGroup::AesImproper,
        WeaknessType::RsaImproperPadding => RuleGroup::RsaImproperPadding,
        _ => RuleGroup::InsecureHash,
    }
}

/// Cipher, key-generator and digest factory calls with their algorithm
/// operand, plus the no-RSA check.
pub(super) fn check_ciphers(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>, adv: &mut Vec<Advisory>) {
    let mut rsa_used = false;
    let mut sensitive_encryption = Vec::new();
    for (m, class, method) in ctx.methods() {
        let relevant = method.instructions.iter().any(|i| {
            i.op.as_invoke().is_some_and(|(_, _, r)| {
                r.name == "getInstance" || (r.class == CIPHER && (r.name == "doFinal" || r.name == "update"))
            })
        });
        if !relevant {
            continue;
        }
        let facts = ctx.consts(class, method);
        for (i, ins) in method.instructions.iter().enumerate() {
            let Op::Invoke { kind, args, method: mref } = &ins.op else { continue };
            let slots = arg_slots(*kind, args, mref);
            if mref.class == CIPHER && (mref.name == "doFinal" || mref.name == "update") {
                let data = slots.iter().skip(1).any(|&r| !ctx.taint.sources_at(m, i, r).is_empty());
                if data {
                    sensitive_encryption.push((m, i));
                }
                continue;
            }
            if mref.name != "getInstance" || *kind != InvokeKind::Static {
                continue;
            }
            let Some(&alg_reg) = slots.first() else { continue };
            let value = facts.reg(i, alg_reg);
            let factory = mref.class.as_str();
            match factory {
                "Ljavax/crypto/Cipher;" => match value {
                    AbsVal::Str(t) => {
                        if Transformation::parse(t).algorithm == "RSA" {
                            rsa_used = true;
                        }
                        for w in classify_transformation(t) {
                            out.push(ctx.hit(group_of(w), w, m, Some(i), format!("Cipher.getInstance(\"{t}\")")));
                        }
                    }
                    _ => adv.push(ctx.advisory(
                        AdvisoryKind::Indeterminate,
                        "cipher_transformation",
                        m,
                        Some(i),
                        "cipher transformation is not a compile-time constant".into(),
                    )),
                },
                "Ljavax/crypto/KeyGenerator;" | "Ljavax/crypto/SecretKeyFactory;" => {
                    if let AbsVal::Str(a) = value {
                        let alg = Transformation::parse(a).algorithm;
                        if alg == "DES" || alg == "BLOWFISH" {
                            let name = crate::smali::types::simple_name(factory);
                            out.push(ctx.hit(
                                RuleGroup::DesBlowfish,
                                WeaknessType::InsecureDesBlowfish,
                                m,
                                Some(i),
                                format!("{name}.getInstance(\"{a}\")"),
                            ));
                        }
                    }
                }
                "Ljava/security/KeyPairGenerator;" | "Ljava/security/KeyFactory;" => {
                    if let AbsVal::Str(a) = value {
                        if a.eq_ignore_ascii_case("RSA") {
                            rsa_used = true;
                        }
                    }
                }
                "Ljava/security/MessageDigest;" => match value {
                    AbsVal::Str(a) if is_insecure_hash(a) => out.push(ctx.hit(
                        RuleGroup::InsecureHash,
                        WeaknessType::InsecureHash,
                        m,
                        Some(i),
                        format!("MessageDigest.getInstance(\"{a}\")"),
                    )),
                    AbsVal::Str(_) => {}
                    _ => adv.push(ctx.advisory(
                        AdvisoryKind::Indeterminate,
                        "digest_algorithm",
                        m,
                        Some(i),
                        "digest algorithm is not a compile-time constant".into(),
                    )),
                },
                _ => {}
            }
        }
    }
    if !rsa_used && ctx.options.enabled(RuleGroup::RsaAbsent) {
        for (m, i) in sensitive_encryption {
            out.push(ctx.hit(
                RuleGroup::RsaAbsent,
                WeaknessType::NoRsa,
                m,
                Some(i),
                "sensitive data encrypted without any RSA usage in the app".into(),
            ));
        }
    }
}

/// `SecureRandom.setSeed` or the seeding constructor with a constant seed.
pub(super) fn check_secure_random(ctx: &RuleContext<'_, '_>, out: &mut Vec<PatternHit>) {
    const SR: &str = "Ljava/security/SecureRandom;";
    for (m, class, method) in ctx.methods() {
        let seeded = |r: &crate::smali::MethodRef| {
            r.class == SR && (r.name == "setSeed" || (r.name == "<init>" && r.parameters == ["[B"]))
        };
        if !method.instructions.iter().any(|i| i.op.as_invoke().is_some_and(|(_, _, r)| seeded(r))) {
            continue;
        }
        let facts = ctx.consts(class, method);
        for (i, ins) in method.instructions.iter().enumerate() {
            let Some((kind, args, mref)) = ins.op.as_invoke() else { continue };
            if !seeded(mref) {
                continue;
            }
            let slots = arg_slots(kind, args, mref);
            let Some(&seed) = slots.get(1) else { continue };
            let evidence = match facts.reg(i, seed) {
                AbsVal::Int(v) => Some(format!("seed {v:#x}")),
                _ if ctx.taint.marker_at(Marker::HardcodedBytes, m, i, seed) => Some("seed from a literal".to_string()),
                _ => None,
            };
            if let Some(e) = evidence {
                out.push(ctx.hit(RuleGroup::SecureRandomConstantSeed, WeaknessType::InsecureSecureRandom, m, Some(i), e));
            }
        }
    }
}
