// Tag sensitive input views of an app's layouts with the keyword catalog.
//
// cargo run --example tag_sensitive_views

use std::error::Error;
use std::path::Path;

use bankscan::resources::Resources;
use bankscan::tagging::{match_keyword, tag_layouts, KeywordCatalog, SensitiveCategory};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let catalog = KeywordCatalog::builtin();
    let mut out = String::from("catalog:");
    for c in SensitiveCategory::ALL {
        out.push_str(&format!(" {c}={}", catalog.count(c)));
    }
    out.push('\n');

    let app = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps/screenshot_login");
    let res = Resources::load(&app)?;
    for v in tag_layouts(&res.layouts, &catalog) {
        out.push_str(&format!("{} -> {} ({}) via {:?} \"{}\"\n", v.resource_id, v.keyword, v.category, v.evidence, v.matched));
    }

    // identifiers are split into tokens; a keyword must cover whole tokens
    for id in ["et_login_pwd", "cardNumberInput", "login_fragement", "spinnerGender", "pkgname.txt"] {
        match match_keyword(id, &catalog) {
            Some(m) => out.push_str(&format!("{id}: {} ({})\n", m.keyword, m.category)),
            None => out.push_str(&format!("{id}: no match\n")),
        }
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
