// Build the call graph, find entry points and ask whether a method can run.
//
// cargo run --example call_graph_reachability

use std::error::Error;
use std::path::Path;

use bankscan::dataflow::consts::FieldConsts;
use bankscan::graph::{build_call_graph, find_entry_points, Reachability};
use bankscan::resources::Resources;
use bankscan::smali::{load_program, MethodKey};

const TRUST: &str = "Lcom/ismsbank/app/UpdateChecker$TrustAllManager;";

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let mut out = String::new();
    for app in ["update_trustall", "update_deadtrust"] {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/apps").join(app);
        let res = Resources::load(&dir)?;
        let program = load_program(&dir)?;
        let fields = FieldConsts::compute(&program);
        let cg = build_call_graph(&program, &res.manifest);
        let entries = find_entry_points(&program, &res.manifest, &res.layouts, &cg, &fields);
        let reach = Reachability::new(&cg, entries.nodes());

        out.push_str(&format!("{app}: {} nodes, {} edges, {} entry points\n", cg.nodes().len(), cg.edges().len(), entries.entries.len()));
        let target = MethodKey::new(TRUST, "checkServerTrusted", "([Ljava/security/cert/X509Certificate;Ljava/lang/String;)V");
        let id = cg.node_id(&target).ok_or("method not in graph")?;
        let q = reach.query(id);
        out.push_str(&format!("  checkServerTrusted reachable={} (path={}, instantiated={})\n", q.reachable, q.path_exists, q.instantiated));
        for step in reach.describe(&q.path) {
            out.push_str(&format!("    {}{}\n", step.method, step.via.map(|k| format!("  --{k:?}-->")).unwrap_or_default()));
        }
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
