//! Sensitive-data tagging: keyword catalog, view tagging and binding of
//! tagged views to code variables.

mod bind;
mod catalog;
mod matcher;

use serde::Serialize;

pub use bind::{bind_variables, Locus, SourceLine, TaggedVariable};
pub use catalog::{
    KeywordCatalog, KeywordEntry, Provenance, SensitiveCategory, Stoplist, BUILTIN_KEYWORDS, BUILTIN_STOPLIST,
    DEFAULT_THRESHOLD,
};
pub use matcher::{match_keyword, tokenize, KeywordMatch};

use crate::resources::{pair_labels, LabelPair, Layout, ViewKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    LabelText,
    ResourceId,
    Hint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaggedView {
    pub resource_id: String,
    pub layout_file: String,
    pub keyword: String,
    pub category: SensitiveCategory,
    pub evidence: Evidence,
    /// The text that matched.
    pub matched: String,
}

/// Tags label pairs: the label text is tried first, then the target id.
pub fn tag_views(pairs: &[LabelPair], catalog: &KeywordCatalog) -> Vec<TaggedView> {
    pairs
        .iter()
        .filter_map(|p| {
            let (m, evidence, matched) = match_keyword(&p.label, catalog)
                .map(|m| (m, Evidence::LabelText, &p.label))
                .or_else(|| match_keyword(&p.target, catalog).map(|m| (m, Evidence::ResourceId, &p.target)))?;
            Some(TaggedView {
                resource_id: p.target.clone(),
                layout_file: p.layout_file.clone(),
                keyword: m.keyword,
                category: m.category,
                evidence,
                matched: matched.clone(),
            })
        })
        .collect()
}

/// Tags every layout: label pairs first, then unpaired EditText/TextView
/// elements by their own id or hint.
pub fn tag_layouts(layouts: &[Layout], catalog: &KeywordCatalog) -> Vec<TaggedView> {
    let mut out = Vec::new();
    for layout in layouts {
        let pairs = pair_labels(&layout.views);
        let mut tagged = tag_views(&pairs, catalog);
        for v in &layout.views {
            let Some(id) = &v.resource_id else { continue };
            if !matches!(v.view_kind, ViewKind::EditText | ViewKind::TextView) || pairs.iter().any(|p| &p.target == id) {
                continue;
            }
            let hit = match_keyword(id, catalog)
                .map(|m| (m, Evidence::ResourceId, id.clone()))
                .or_else(|| {
                    let h = v.hint.as_ref()?;
                    match_keyword(h, catalog).map(|m| (m, Evidence::Hint, h.clone()))
                });
            if let Some((m, evidence, matched)) = hit {
                tagged.push(TaggedView {
                    resource_id: id.clone(),
                    layout_file: layout.file.clone(),
                    keyword: m.keyword,
                    category: m.category,
                    evidence,
                    matched,
                });
            }
        }
        out.extend(tagged);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::PairKind;

    fn pair(label: &str, target: &str) -> LabelPair {
        LabelPair { label: label.into(), target: target.into(), pair_kind: PairKind::TextViewEditText, layout_file: "l".into() }
    }

    #[test]
    fn tags_pairs() {
        let c = KeywordCatalog::builtin();
        let t = tag_views(&[pair("PIN", "edit_PIN"), pair("Account balance", "text_balance"), pair("Welcome", "text_greeting")], &c);
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].keyword.as_str(), t[0].category, t[0].evidence), ("pin", SensitiveCategory::Credential, Evidence::LabelText));
        assert_eq!((t[1].keyword.as_str(), t[1].category), ("balance", SensitiveCategory::FinancialInfo));
    }

    #[test]
    fn id_is_fallback_evidence() {
        let c = KeywordCatalog::builtin();
        let t = tag_views(&[pair("Enter here", "et_password")], &c);
        assert_eq!(t[0].evidence, Evidence::ResourceId);
        assert_eq!(t[0].keyword, "password");
    }
}
