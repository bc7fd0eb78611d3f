// Run the pipeline up to taint analysis and print each source-to-sink path.
//
// cargo run --example taint_flows

use std::error::Error;
use std::path::Path;

use bankscan::{ScanConfig, Scanner};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let scanner = Scanner::new(ScanConfig::default())?;
    let mut out = String::new();
    for app in ["prefs_login", "composite_bank"] {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps").join(app);
        let a = scanner.analyze(&dir)?;
        out.push_str(&format!("{app}: {} tagged variables, {} flows\n", a.tagged.len(), a.flows.len()));
        for f in &a.flows {
            out.push_str(&format!(
                "  {} \"{}\" -> {}->{} [{}]\n",
                f.source.view_id,
                f.source.keyword,
                f.sink.class,
                f.sink.method,
                f.weakness().name()
            ));
            for s in &f.steps {
                let line = s.line.as_ref().map(|l| format!(" line {}", l.line)).unwrap_or_default();
                out.push_str(&format!("      {} [{}]{line}\n", s.method, s.carrier));
            }
        }
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
