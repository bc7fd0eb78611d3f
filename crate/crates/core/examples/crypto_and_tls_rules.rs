// Classify cipher transformations and run the pattern rules on an app.
//
// cargo run --example crypto_and_tls_rules

use std::error::Error;
use std::path::Path;

use bankscan::rules::{classify_transformation, is_insecure_hash};
use bankscan::scan::parse_date;
use bankscan::{ScanConfig, Scanner};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let mut out = String::new();
    for t in ["AES", "AES/ECB/PKCS5Padding", "AES/CBC/NoPadding", "AES/GCM/NoPadding", "DES/CBC/PKCS5Padding", "DESede/CBC/PKCS5Padding", "RSA/ECB/PKCS1Padding", "RSA/ECB/OAEPWithSHA-256AndMGF1Padding"] {
        let w: Vec<&str> = classify_transformation(t).iter().map(|w| w.name()).collect();
        out.push_str(&format!("{t:<40} {}\n", if w.is_empty() { "ok".to_string() } else { w.join(", ") }));
    }
    for h in ["MD5", "SHA-1", "SHA-256"] {
        out.push_str(&format!("{h:<40} {}\n", if is_insecure_hash(h) { "insecure" } else { "ok" }));
    }

    let config = ScanConfig { reference_date: parse_date("2024-01-01")?, ..ScanConfig::default() };
    let scanner = Scanner::new(config)?;
    for app in ["update_trustall", "crypto_util", "composite_bank"] {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps").join(app);
        let a = scanner.analyze(&dir)?;
        out.push_str(&format!("{app}\n"));
        for h in &a.rules.hits {
            out.push_str(&format!("  hit  {} {} :: {}\n", h.group.id(), h.location.class, h.evidence));
        }
        for h in &a.rules.suppressed {
            out.push_str(&format!("  dead {} {} :: {}\n", h.group.id(), h.location.class, h.evidence));
        }
        for adv in &a.rules.advisories {
            out.push_str(&format!("  note {}: {}\n", adv.rule, adv.message));
        }
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
