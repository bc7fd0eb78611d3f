use super::catalog::{KeywordCatalog, SensitiveCategory};

/// Longest keyword span considered, in tokens.
const MAX_SPAN: usize = 4;

/// Splits identifiers and labels into lowercase tokens: on non-alphanumerics,
/// camelCase humps (`userPIN` -> `user`, `pin`; `URLText` -> `url`, `text`)
/// and letter/digit boundaries.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (p, c) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = (p.is_lowercase() && c.is_uppercase())
                || (p.is_uppercase() && c.is_uppercase() && next_lower)
                || (p.is_alphabetic() != c.is_alphabetic());
            if boundary {
                tokens.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        if start < chars.len() {
            tokens.push(chars[start..].iter().collect::<String>().to_lowercase());
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordMatch {
    pub keyword: String,
    pub category: SensitiveCategory,
}

/// Finds the best keyword occurring as a whole token or whole run of
/// consecutive tokens in `text`.
///
/// Longer keywords win; ties go to the earlier catalog entry.
pub fn match_keyword(text: &str, catalog: &KeywordCatalog) -> Option<KeywordMatch> {
    let tokens = tokenize(text);
    let mut best: Option<(usize, usize)> = None; // (compact length, catalog index)
    for i in 0..tokens.len() {
        let mut span = String::new();
        for tok in tokens.iter().skip(i).take(MAX_SPAN) {
            span.push_str(tok);
            if let Some((idx, _)) = catalog.lookup_compact(&span) {
                let cand = (span.len(), idx);
                best = match best {
                    Some((len, bi)) if len > cand.0 || (len == cand.0 && bi <= idx) => Some((len, bi)),
                    _ => Some(cand),
                };
            }
        }
    }
    best.map(|(_, idx)| {
        let e = &catalog.entries()[idx];
        KeywordMatch { keyword: e.keyword.clone(), category: e.category }
    })
}
