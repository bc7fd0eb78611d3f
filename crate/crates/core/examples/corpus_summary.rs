// Scan every app under a directory in parallel and count affected apps per
// weakness type.
//
// cargo run --example corpus_summary [root]

use std::error::Error;
use std::path::PathBuf;

use bankscan::scan::parse_date;
use bankscan::{ScanConfig, Scanner};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .filter(|p| p.is_dir())
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps"));
    let config = ScanConfig { reference_date: parse_date("2024-01-01")?, jobs: 4, ..ScanConfig::default() };
    let run = Scanner::new(config)?.scan_corpus(&root)?;
    let mut out = run.summary.to_table();
    for (name, r) in &run.reports {
        out.push_str(&format!("{name:<20} {:>2} findings  {}\n", r.findings.len(), r.app.package));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
