// Parse one smali class, list its methods and print a method's CFG.
//
// cargo run --example parse_smali

use std::error::Error;
use std::path::Path;

use bankscan::graph::{build_cfg, cfg_dot};
use bankscan::smali::{parse_class, print_class};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps/crypto_util/smali/com/nbank/mobile/CryptoUtil.smali");
    let class = parse_class(&std::fs::read_to_string(&path)?)?;
    let mut out = format!("{} extends {}\n", class.name, class.superclass.as_deref().unwrap_or("-"));
    for f in &class.fields {
        out.push_str(&format!("  field {}:{}\n", f.name, f.ty));
    }
    for m in &class.methods {
        out.push_str(&format!("  {}{}  {} instructions\n", m.name, m.descriptor, m.instructions.len()));
    }

    let encrypt = class.methods_named("encrypt").next().ok_or("no encrypt method")?;
    let cfg = build_cfg(&class.name, encrypt);
    out.push_str(&format!("encrypt: {} blocks, {} edges\n", cfg.blocks.len(), cfg.edges.len()));
    out.push_str(&cfg_dot(&cfg));

    // printing and re-parsing gives the same IR
    let again = parse_class(&print_class(&class))?;
    assert_eq!(again.methods.len(), class.methods.len());
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
