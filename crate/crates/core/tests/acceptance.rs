//! Acceptance gate: one PASS/FAIL line per criterion, with its time limit.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::process::ExitCode;

use qisom::checks::{Suite, CHECKS};

fn main() -> ExitCode {
    let suite = Suite::acceptance(2024).expect("random parameters are valid");
    println!("acceptance: {} criteria, {} parameter draws", CHECKS.len(), suite.qs.len());
    let mut failed = Vec::new();
    for id in 1..=CHECKS.len() {
        let outcome = suite.run(id);
        println!("{}", outcome.line());
        if !outcome.ok() {
            failed.push(outcome.name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CHECKS.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
