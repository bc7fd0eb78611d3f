// Find certificates and private keys shipped in a package and check them
// against two reference dates.
//
// cargo run --example certificate_audit

use std::error::Error;
use std::path::Path;

use bankscan::resources::extract_certificates;
use bankscan::rules::check_certificates;
use bankscan::scan::parse_date;

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps/certs_bundle");
    let mut diags = Vec::new();
    let files = extract_certificates(&dir, &mut diags);
    let mut out = String::new();
    for c in &files.certificates {
        out.push_str(&format!("{}: {} until {} ({})\n", c.source, c.subject, c.not_after.date(), c.signature_algorithm));
    }
    for k in &files.private_keys {
        out.push_str(&format!("{}: {}\n", k.source, k.label));
    }
    for date in ["2016-06-01", "2024-01-01"] {
        let reference = parse_date(date)?.midnight().assume_utc();
        out.push_str(&format!("as of {date}:\n"));
        for h in check_certificates(&files.certificates, reference) {
            out.push_str(&format!("  {} {}\n", h.weakness.name(), h.evidence));
        }
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
