// Scan one unpacked app and render the report as text and json.
//
// cargo run --example scan_report [app_dir]

use std::error::Error;
use std::path::PathBuf;

use bankscan::report::render;
use bankscan::scan::parse_date;
use bankscan::{OutputFormat, ScanConfig, Scanner};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .filter(|p| p.is_dir())
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps/composite_bank"));
    let config = ScanConfig { reference_date: parse_date("2024-01-01")?, ..ScanConfig::default() };
    let report = Scanner::new(config)?.scan(&dir)?;

    let mut out = render(&report, OutputFormat::Text);
    out.push_str(&render(&report, OutputFormat::Table));
    let json = report.to_json();
    out.push_str(&format!("json report: {} bytes, {} findings\n", json.len(), report.summary.total));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
