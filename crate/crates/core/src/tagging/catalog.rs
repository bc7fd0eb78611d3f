use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BUILTIN_KEYWORDS: &str = include_str!("../../data/keywords.tsv");
pub const BUILTIN_STOPLIST: &str = include_str!("../../data/stoplist.txt");

/// Default minimum similarity for neighbor expansion.
pub const DEFAULT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensitiveCategory {
    Identity,
    Credential,
    PersonalInfo,
    FinancialInfo,
}

impl SensitiveCategory {
    pub const ALL: [SensitiveCategory; 4] = [
        SensitiveCategory::Identity,
        SensitiveCategory::Credential,
        SensitiveCategory::PersonalInfo,
        SensitiveCategory::FinancialInfo,
    ];
}

impl fmt::Display for SensitiveCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SensitiveCategory {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let k: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match k.as_str() {
            "identity" => Ok(SensitiveCategory::Identity),
            "credential" | "credentials" => Ok(SensitiveCategory::Credential),
            "personalinfo" | "personal" => Ok(SensitiveCategory::PersonalInfo),
            "financialinfo" | "financial" => Ok(SensitiveCategory::FinancialInfo),
            _ => Err(format!("unknown category `{}`", s.trim())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Builtin,
    File,
    EmbeddingExpanded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordEntry {
    /// Lowercase, single-spaced.
    pub keyword: String,
    pub category: SensitiveCategory,
    pub provenance: Provenance,
}

impl KeywordEntry {
    /// Keyword with separators removed; what token spans are compared to.
    pub fn compact(&self) -> String {
        compact(&self.keyword)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordCatalog {
    entries: Vec<KeywordEntry>,
    index: BTreeMap<String, usize>,
}

pub(crate) fn compact(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl KeywordCatalog {
    pub fn builtin() -> KeywordCatalog {
        Self::parse(BUILTIN_KEYWORDS, "<builtin keywords>", Provenance::Builtin).expect("builtin keyword table is well-formed")
    }

    pub fn from_file(path: &std::path::Path) -> Result<KeywordCatalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string(), Provenance::File)
    }

    /// Parses `keyword<TAB>category` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str, provenance: Provenance) -> Result<KeywordCatalog> {
        let mut cat = KeywordCatalog::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Catalog { path: origin.to_string(), line: n + 1, message };
            let (kw, category) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `keyword<TAB>category`".into()))?;
            let category: SensitiveCategory = category.trim().parse().map_err(err)?;
            let keyword = normalize(kw);
            if compact(&keyword).is_empty() {
                return Err(err("empty keyword".into()));
            }
            cat.push(KeywordEntry { keyword, category, provenance });
        }
        Ok(cat)
    }

    /// Adds an entry unless an equal keyword (after normalization) exists.
    /// Returns whether it was added.
    pub fn push(&mut self, entry: KeywordEntry) -> bool {
        let key = entry.compact();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        true
    }

    pub fn entries(&self) -> &[KeywordEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, keyword: &str) -> Option<&KeywordEntry> {
        self.index.get(&compact(keyword)).map(|&i| &self.entries[i])
    }

    pub(crate) fn lookup_compact(&self, compact: &str) -> Option<(usize, &KeywordEntry)> {
        self.index.get(compact).map(|&i| (i, &self.entries[i]))
    }

    pub fn count(&self, category: SensitiveCategory) -> usize {
        self.entries.iter().filter(|e| e.category == category).count()
    }

    /// Appends neighbors of existing keywords from a
    /// `keyword<TAB>neighbor<TAB>similarity` file.
    ///
    /// A neighbor is added, in its keyword's category, when its similarity is
    /// at least `threshold` and it is not on the stoplist.
    pub fn expand(&self, neighbors: &str, threshold: f64, stoplist: &Stoplist) -> Result<KeywordCatalog> {
        let mut out = self.clone();
        for (n, raw) in neighbors.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = |message: String| Error::Catalog { path: "<neighbors>".into(), line: n + 1, message };
            if cols.len() != 3 {
                return Err(err("expected `keyword<TAB>neighbor<TAB>similarity`".into()));
            }
            let sim: f64 = cols[2].parse().map_err(|_| err(format!("bad similarity `{}`", cols[2])))?;
            let Some(base) = self.get(cols[0]) else { continue };
            let neighbor = normalize(cols[1]);
            if sim < threshold || stoplist.contains(&neighbor) || compact(&neighbor).is_empty() {
                continue;
            }
            out.push(KeywordEntry {
                keyword: neighbor,
                category: base.category,
                provenance: Provenance::EmbeddingExpanded,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    pub fn builtin() -> Stoplist {
        Stoplist::parse(BUILTIN_STOPLIST)
    }

    pub fn parse(text: &str) -> Stoplist {
        Stoplist(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(compact)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&compact(word))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_cardinalities() {
        let c = KeywordCatalog::builtin();
        assert_eq!(c.len(), 70);
        assert_eq!(c.count(SensitiveCategory::Identity), 13);
        assert_eq!(c.count(SensitiveCategory::Credential), 11);
        assert_eq!(c.count(SensitiveCategory::PersonalInfo), 24);
        assert_eq!(c.count(SensitiveCategory::FinancialInfo), 22);
        for kw in ["password", "passcode", "pwd", "pin"] {
            assert_eq!(c.get(kw).unwrap().category, SensitiveCategory::Credential);
        }
        for kw in ["credit card", "amount", "payment", "payee"] {
            assert_eq!(c.get(kw).unwrap().category, SensitiveCategory::FinancialInfo);
        }
        for kw in ["username", "userid", "byname", "user-agent"] {
            assert_eq!(c.get(kw).unwrap().category, SensitiveCategory::Identity);
        }
    }

    #[test]
    fn duplicates_collapse() {
        let c = KeywordCatalog::parse("pin\tCredential\nPIN\tCredential\n", "t", Provenance::File).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn unknown_category_is_rejected_with_line() {
        match KeywordCatalog::parse("# header\npin\tSecrets\n", "t", Provenance::File) {
            Err(Error::Catalog { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expansion_respects_threshold_and_stoplist() {
        let base = KeywordCatalog::builtin();
        let stop = Stoplist::builtin();
        let text = "password\tpassphrase\t0.81\nbalance\tinfo\t0.9\npassword\tsecretish\t0.3\nnotakeyword\tfoo\t0.99\n";
        let c = base.expand(text, DEFAULT_THRESHOLD, &stop).unwrap();
        let added = c.get("passphrase").unwrap();
        assert_eq!(added.category, SensitiveCategory::Credential);
        assert_eq!(added.provenance, Provenance::EmbeddingExpanded);
        assert!(c.get("info").is_none());
        assert!(c.get("secretish").is_none());
        assert!(c.get("foo").is_none());
        assert_eq!(base.expand("", DEFAULT_THRESHOLD, &stop).unwrap(), base);
    }
}
