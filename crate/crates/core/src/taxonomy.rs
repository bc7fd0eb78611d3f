//! Weakness taxonomy: four categories, 22 table rows, and the finer-grained
//! weakness types that findings are reported under.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    C1,
    C2,
    C3,
    C4,
}

impl Category {
    pub fn adversary(self) -> Adversary {
        match self {
            Category::C4 => Adversary::CommunicationAdversary,
            _ => Adversary::AppAdversary,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Category::C1 => "Input Harvest",
            Category::C2 => "Data Storage",
            Category::C3 => "Data Transmission",
            Category::C4 => "Communication Infrastructure",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "C1" | "c1" => Ok(Category::C1),
            "C2" | "c2" => Ok(Category::C2),
            "C3" | "c3" => Ok(Category::C3),
            "C4" | "c4" => Ok(Category::C4),
            other => Err(format!("unknown category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    AppAdversary,
    CommunicationAdversary,
}

/// How banks tended to react to a weakness type. Advisory only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityTier {
    Concerned,
    Aware,
}

macro_rules! weakness_types {
    ($( $variant:ident => $name:literal, $row:literal, $cat:ident, $tier:ident; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum WeaknessType {
            $( $variant, )*
        }

        impl WeaknessType {
            pub const ALL: &'static [WeaknessType] = &[ $( WeaknessType::$variant, )* ];

            /// Name used in reports and catalog files.
            pub fn name(self) -> &'static str {
                match self { $( WeaknessType::$variant => $name, )* }
            }

            /// Taxonomy row this type is reported under.
            pub fn row(self) -> &'static str {
                match self { $( WeaknessType::$variant => $row, )* }
            }

            pub fn category(self) -> Category {
                match self { $( WeaknessType::$variant => Category::$cat, )* }
            }

            pub fn tier(self) -> SeverityTier {
                match self { $( WeaknessType::$variant => SeverityTier::$tier, )* }
            }
        }
    };
}

weakness_types! {
    Screenshot => "Screenshot", "screenshot", C1, Concerned;
    SharedPreference => "SharedPreference", "shared_preferences", C2, Concerned;
    WebViewDb => "WebView DB", "webview_db", C2, Concerned;
    Logging => "Logging", "logging", C2, Concerned;
    SdCard => "SD Card", "sd_card", C2, Concerned;
    TextFile => "Text File", "text_file", C2, Concerned;
    Sms => "SMS", "sms", C3, Concerned;
    IccDynamicReceiver => "ICC via dynamically registered Receiver", "icc_dynamic_receiver", C3, Aware;
    IccImplicitIntent => "ICC via implicit Intent", "icc_implicit_intent", C3, Aware;
    IccComponentExport => "ICC via Component export", "icc_component_export", C3, Aware;
    HttpOnly => "HTTP only", "http_only", C4, Aware;
    CertificateExpired => "Invalid certificate: expired", "invalid_certificate", C4, Aware;
    CertificateSha1 => "Invalid certificate: SHA-1", "invalid_certificate", C4, Aware;
    AllowAllHostname => "Invalid authentication: allow all hostname", "allow_all_hostname", C4, Concerned;
    InvalidHostnameVerification => "Invalid authentication: hostname verification", "invalid_hostname_verification", C4, Concerned;
    InvalidServerVerification => "Invalid authentication: server verification", "invalid_server_verification", C4, Concerned;
    HardcodedKey => "Hard-coded Key", "hardcoded_key", C4, Concerned;
    InsecureDesBlowfish => "Insecure DES/Blowfish", "des_blowfish", C4, Aware;
    AesEcbMode => "Improper AES: ECB mode", "aes_improper_function", C4, Aware;
    AesNoPadding => "Improper AES: NoPadding", "aes_improper_function", C4, Aware;
    NoRsa => "Improper RSA: no RSA", "no_rsa", C4, Aware;
    RsaImproperPadding => "Improper RSA: improper padding", "rsa_improper_function", C4, Aware;
    InsecureSecureRandom => "Insecure SecureRandom", "insecure_secure_random", C4, Concerned;
    InsecureHash => "Insecure hash function", "insecure_hash", C4, Aware;
}

impl WeaknessType {
    pub fn adversary(self) -> Adversary {
        self.category().adversary()
    }

    /// Accepts the report name (`SD Card`), a compact form (`sdcard`,
    /// `SD_CARD`) or the variant name.
    pub fn parse(s: &str) -> Option<WeaknessType> {
        let key = compact(s);
        WeaknessType::ALL
            .iter()
            .copied()
            .find(|t| compact(t.name()) == key || compact(&format!("{t:?}")) == key)
            .or(match key.as_str() {
                "smsleakage" => Some(WeaknessType::Sms),
                "sharedpreferences" => Some(WeaknessType::SharedPreference),
                _ => None,
            })
    }
}

fn compact(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl fmt::Display for WeaknessType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeaknessType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        WeaknessType::parse(s).ok_or_else(|| format!("unknown weakness type `{}`", s.trim()))
    }
}

impl Serialize for WeaknessType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for WeaknessType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of the shipped taxonomy table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyRow {
    pub id: String,
    pub category: Category,
    pub description: String,
}

pub const TAXONOMY_TSV: &str = include_str!("../data/taxonomy.tsv");

/// Parses the taxonomy table (`row_id<TAB>category<TAB>description`).
pub fn taxonomy_rows() -> Vec<TaxonomyRow> {
    parse_taxonomy(TAXONOMY_TSV).expect("builtin taxonomy table is well-formed")
}

pub fn parse_taxonomy(text: &str) -> Result<Vec<TaxonomyRow>, String> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(format!("line {}: expected 3 columns", n + 1));
        }
        rows.push(TaxonomyRow {
            id: cols[0].to_string(),
            category: cols[1].parse().map_err(|e| format!("line {}: {e}", n + 1))?,
            description: cols[2].to_string(),
        });
    }
    Ok(rows)
}

/// Weakness types reported under `row`.
pub fn types_for_row(row: &str) -> Vec<WeaknessType> {
    WeaknessType::ALL.iter().copied().filter(|t| t.row() == row).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_type_lands_on_a_row_of_its_category() {
        let rows = taxonomy_rows();
        for t in WeaknessType::ALL {
            let row = rows.iter().find(|r| r.id == t.row()).unwrap_or_else(|| panic!("{t:?} has no row"));
            assert_eq!(row.category, t.category(), "{t:?}");
        }
    }

    #[test]
    fn row_counts_per_category() {
        let rows = taxonomy_rows();
        let count = |c| rows.iter().filter(|r| r.category == c).count();
        assert_eq!((count(Category::C1), count(Category::C2), count(Category::C3), count(Category::C4)), (1, 5, 4, 12));
    }

    #[test]
    fn names_round_trip() {
        for t in WeaknessType::ALL {
            assert_eq!(WeaknessType::parse(t.name()), Some(*t));
            assert_eq!(WeaknessType::parse(&format!("{t:?}")), Some(*t));
        }
        assert_eq!(WeaknessType::parse("sd_card"), Some(WeaknessType::SdCard));
        assert_eq!(WeaknessType::parse("SMS Leakage"), Some(WeaknessType::Sms));
        assert_eq!(WeaknessType::parse("Foo"), None);
    }

    #[test]
    fn adversary_follows_category() {
        assert_eq!(WeaknessType::SharedPreference.adversary(), Adversary::AppAdversary);
        assert_eq!(WeaknessType::Screenshot.adversary(), Adversary::AppAdversary);
        assert_eq!(WeaknessType::AesEcbMode.adversary(), Adversary::CommunicationAdversary);
    }
}
