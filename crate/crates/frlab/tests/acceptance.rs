//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;

use frlab::acceptance::{run_criteria, AcceptanceOptions};

fn main() -> ExitCode {
    let ids: Vec<u8> = (1..=11).collect();
    let summary = run_criteria(&AcceptanceOptions::default(), &ids);
    for c in &summary.criteria {
        println!("{}", c.line());
    }
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    if let Err(e) = summary.write(&out) {
        eprintln!("could not write acceptance artifacts: {e}");
    }
    println!("artifacts: {}", out.display());
    let failed = summary.criteria.iter().filter(|c| !c.pass).count();
    println!("acceptance: {} passed, {failed} failed", summary.criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
