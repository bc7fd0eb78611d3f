//! Prints one PASS/FAIL line per acceptance criterion and fails if any fail.

mod common;

use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = 0;
    for (name, check) in common::criteria::all() {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(problems) => {
                failed += 1;
                println!("FAIL  {name}");
                for p in problems {
                    println!("      {p}");
                }
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
