// Compare the reports of two versions of the same app.
//
// cargo run --example version_diff

use std::error::Error;
use std::path::Path;

use bankscan::report::diff_reports;
use bankscan::{Report, ScanConfig, Scanner};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let versions = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/versions");
    let scanner = Scanner::new(ScanConfig::default())?;
    let old = scanner.scan(&versions.join("ismsbank_5.0"))?;
    let new = scanner.scan(&versions.join("ismsbank_5.2"))?;

    // reports survive a json round trip, so diffs can run on stored files
    let old = Report::from_json(&old.to_json())?;
    let d = diff_reports(&old, &new);
    Ok(d.to_text())
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
