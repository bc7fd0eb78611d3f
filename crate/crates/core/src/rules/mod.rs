//! Pattern rules for communication infrastructure, screenshots and ICC
//! surface. Every code-site hit is filtered through entry-point
//! reachability unless that filter is disabled.

mod certs;
mod crypto;
mod icc;
mod keys;
mod network;
mod screenshot;
mod tls;

pub use certs::check_certificates;
pub use crypto::{classify_transformation, is_insecure_hash};

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use time::OffsetDateTime;

use crate::dataflow::consts::{ConstFacts, FieldConsts};
use crate::error::{Error, Result};
use crate::graph::{CallGraph, EntryPoints, NodeId, PathStep, Reachability};
use crate::resources::{ManifestInfo, PackageFiles};
use crate::smali::{MethodKey, MethodRef, SmaliProgram};
use crate::tagging::{KeywordCatalog, SensitiveCategory, SourceLine, TaggedVariable};
use crate::taint::TaintFacts;
use crate::taxonomy::WeaknessType;

macro_rules! rule_groups {
    ($( $variant:ident => $id:literal, [$($w:ident),+]; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum RuleGroup {
            $( $variant, )*
        }

        impl RuleGroup {
            pub const ALL: &'static [RuleGroup] = &[ $( RuleGroup::$variant, )* ];

            pub fn id(self) -> &'static str {
                match self { $( RuleGroup::$variant => $id, )* }
            }

            /// Weakness types this group can report.
            pub fn weaknesses(self) -> &'static [WeaknessType] {
                match self { $( RuleGroup::$variant => &[$(WeaknessType::$w),+], )* }
            }
        }
    };
}

rule_groups! {
    HttpOnly => "http_only", [HttpOnly];
    InvalidCertificate => "invalid_certificate", [CertificateExpired, CertificateSha1];
    AllowAllHostname => "allow_all_hostname", [AllowAllHostname];
    TrivialHostnameVerifier => "trivial_hostname_verifier", [InvalidHostnameVerification];
    TrivialServerTrust => "trivial_server_trust", [InvalidServerVerification];
    HardcodedKey => "hardcoded_key", [HardcodedKey];
    DesBlowfish => "des_blowfish", [InsecureDesBlowfish];
    AesImproper => "aes_improper", [AesEcbMode, AesNoPadding];
    RsaAbsent => "rsa_absent", [NoRsa];
    RsaImproperPadding => "rsa_improper_padding", [RsaImproperPadding];
    SecureRandomConstantSeed => "securerandom_constant_seed", [InsecureSecureRandom];
    InsecureHash => "insecure_hash", [InsecureHash];
    Screenshot => "screenshot", [Screenshot];
    IccDynamicReceiver => "icc_dynamic_receiver", [IccDynamicReceiver];
    IccComponentExport => "icc_component_export", [IccComponentExport];
}

impl RuleGroup {
    /// The twelve communication-infrastructure groups.
    pub fn communication() -> impl Iterator<Item = RuleGroup> {
        RuleGroup::ALL.iter().copied().filter(|g| {
            g.weaknesses().iter().all(|w| w.category() == crate::taxonomy::Category::C4)
        })
    }
}

impl fmt::Display for RuleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for RuleGroup {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        RuleGroup::ALL
            .iter()
            .copied()
            .find(|g| g.id() == s.trim())
            .ok_or_else(|| format!("unknown rule group `{}`", s.trim()))
    }
}

impl Serialize for RuleGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for RuleGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rules file contents.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RulesFile {
    pub disabled: Vec<RuleGroup>,
    /// Tag categories that make an unprotected activity a screenshot hit.
    pub screenshot_categories: Vec<SensitiveCategory>,
}

impl Default for RulesFile {
    fn default() -> Self {
        RulesFile {
            disabled: Vec::new(),
            screenshot_categories: vec![SensitiveCategory::Credential, SensitiveCategory::FinancialInfo],
        }
    }
}

impl RulesFile {
    pub fn parse(text: &str) -> Result<RulesFile> {
        toml::from_str(text).map_err(|e| Error::Config(format!("rules file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<RulesFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct RuleOptions {
    pub no_reachability: bool,
    pub strict_keys: bool,
    pub reference_date: OffsetDateTime,
    pub disabled: BTreeSet<RuleGroup>,
    pub screenshot_categories: BTreeSet<SensitiveCategory>,
}

impl RuleOptions {
    pub fn new(reference_date: OffsetDateTime) -> Self {
        let file = RulesFile::default();
        RuleOptions {
            no_reachability: false,
            strict_keys: false,
            reference_date,
            disabled: BTreeSet::new(),
            screenshot_categories: file.screenshot_categories.into_iter().collect(),
        }
    }

    pub fn apply(&mut self, file: &RulesFile) {
        self.disabled = file.disabled.iter().copied().collect();
        self.screenshot_categories = file.screenshot_categories.iter().copied().collect();
    }

    pub fn enabled(&self, g: RuleGroup) -> bool {
        !self.disabled.contains(&g)
    }
}

/// Code or package location of a finding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    /// Class descriptor; empty for package files.
    pub class: String,
    /// `name(descriptor)return`; absent for class- or file-level findings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
}

impl Location {
    pub fn file(path: &str) -> Location {
        Location { file: path.to_string(), class: String::new(), method: None, line: None }
    }

    pub fn at(line: &SourceLine, method: &MethodKey) -> Location {
        Location {
            file: line.file.clone(),
            class: method.class.clone(),
            method: Some(format!("{}{}", method.name, method.descriptor)),
            line: Some(line.java_line.unwrap_or(line.line)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachInfo {
    pub reachable: bool,
    pub instantiated: bool,
    pub path: Vec<PathStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternHit {
    pub group: RuleGroup,
    pub weakness: WeaknessType,
    pub location: Location,
    /// What matched: a transformation string, a seed value, a class name...
    pub evidence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachability: Option<ReachInfo>,
    #[serde(skip)]
    pub site: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvisoryKind {
    /// A pattern matched but its operand could not be resolved.
    Indeterminate,
    /// Attack surface without a confirmed weakness.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Advisory {
    pub kind: AdvisoryKind,
    pub rule: String,
    pub location: Location,
    pub message: String,
}

/// Everything the rules read.
pub struct RuleContext<'a, 'p> {
    pub program: &'p SmaliProgram,
    pub manifest: &'a ManifestInfo,
    pub package_files: &'a PackageFiles,
    pub cg: &'a CallGraph,
    pub entries: &'a EntryPoints,
    pub reach: &'a Reachability<'a>,
    pub taint: &'a TaintFacts<'p>,
    pub fields: &'a FieldConsts,
    pub tagged: &'a [TaggedVariable],
    pub catalog: &'a KeywordCatalog,
    pub options: &'a RuleOptions,
}

impl RuleContext<'_, '_> {
    pub(crate) fn methods(&self) -> impl Iterator<Item = (NodeId, &crate::smali::ClassDef, &crate::smali::MethodDef)> + '_ {
        self.program.methods().filter_map(|(c, m)| Some((self.cg.node_id(&MethodKey::of(c, m))?, c, m)))
    }

    pub(crate) fn consts(&self, class: &crate::smali::ClassDef, method: &crate::smali::MethodDef) -> ConstFacts {
        ConstFacts::analyze(class, method, self.fields)
    }

    /// True if `m` calls `class->name` on `class` or a program subtype of it.
    pub(crate) fn is_call(&self, m: &MethodRef, class: &str, name: &str) -> bool {
        m.name == name && (m.class == class || self.program.is_subtype(&m.class, class))
    }

    pub(crate) fn location(&self, m: NodeId, i: Option<usize>) -> Location {
        let key = &self.cg.node(m).method;
        let class = self.program.class(&key.class).expect("program class");
        let method = class.method(&key.name, &key.descriptor).expect("program method");
        let line = match i {
            Some(i) => crate::taint::line_at(class, method, i),
            None => SourceLine {
                file: class.display_path(),
                line: method.instructions.first().map(|x| x.file_line).unwrap_or(0),
                java_line: method.instructions.first().and_then(|x| x.java_line),
            },
        };
        Location::at(&line, key)
    }

    pub(crate) fn hit(&self, group: RuleGroup, weakness: WeaknessType, m: NodeId, i: Option<usize>, evidence: String) -> PatternHit {
        PatternHit { group, weakness, location: self.location(m, i), evidence, reachability: None, site: Some(m) }
    }

    pub(crate) fn advisory(&self, kind: AdvisoryKind, rule: &str, m: NodeId, i: Option<usize>, message: String) -> Advisory {
        Advisory { kind, rule: rule.to_string(), location: self.location(m, i), message }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleOutcome {
    pub hits: Vec<PatternHit>,
    pub advisories: Vec<Advisory>,
    /// Hits dropped because their site is unreachable.
    pub suppressed: Vec<PatternHit>,
}

/// Evaluates every enabled group and applies the reachability filter.
pub fn scan_patterns(ctx: &RuleContext<'_, '_>) -> RuleOutcome {
    let mut raw = Vec::new();
    let mut advisories = Vec::new();
    let on = |g| ctx.options.enabled(g);

    if on(RuleGroup::DesBlowfish) || on(RuleGroup::AesImproper) || on(RuleGroup::RsaImproperPadding) || on(RuleGroup::InsecureHash) || on(RuleGroup::RsaAbsent) {
        crypto::check_ciphers(ctx, &mut raw, &mut advisories);
    }
    if on(RuleGroup::SecureRandomConstantSeed) {
        crypto::check_secure_random(ctx, &mut raw);
    }
    if on(RuleGroup::AllowAllHostname) || on(RuleGroup::TrivialHostnameVerifier) || on(RuleGroup::TrivialServerTrust) {
        tls::check_tls_authentication(ctx, &mut raw);
    }
    if on(RuleGroup::HardcodedKey) {
        keys::detect_hardcoded_keys(ctx, &mut raw, &mut advisories);
    }
    if on(RuleGroup::HttpOnly) {
        network::check_http_only(ctx, &mut raw);
    }
    if on(RuleGroup::InvalidCertificate) {
        raw.extend(certs::check_certificates(&ctx.package_files.certificates, ctx.options.reference_date));
    }
    if on(RuleGroup::Screenshot) {
        screenshot::check_screenshot(ctx, &mut raw);
    }
    if on(RuleGroup::IccDynamicReceiver) || on(RuleGroup::IccComponentExport) {
        icc::check_icc_surface(ctx, &mut raw, &mut advisories);
    }
    raw.retain(|h| on(h.group));

    let mut out = RuleOutcome { advisories, ..Default::default() };
    for mut h in raw {
        if let Some(site) = h.site {
            let q = ctx.reach.query(site);
            let reachable = q.reachable;
            h.reachability = Some(ReachInfo {
                reachable,
                instantiated: q.instantiated,
                path: ctx.reach.describe(&q.path),
            });
            if !reachable && !ctx.options.no_reachability {
                out.suppressed.push(h);
                continue;
            }
        }
        out.hits.push(h);
    }
    // HTTP-only is an app-level verdict; keep its first site
    let mut seen_http = false;
    out.hits.retain(|h| {
        if h.weakness != WeaknessType::HttpOnly {
            return true;
        }
        !std::mem::replace(&mut seen_http, true)
    });
    out.advisories.sort();
    out.advisories.dedup();
    out
}

/// Sensitive keyword category of an intent extra key, if it names one.
pub(crate) fn sensitive_key(catalog: &KeywordCatalog, key: &str) -> Option<SensitiveCategory> {
    crate::tagging::match_keyword(key, catalog).map(|m| m.category)
}
