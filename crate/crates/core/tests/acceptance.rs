//! Runs the numbered acceptance criteria and prints one verdict per line,
//! followed by the full report. Exits non-zero if any criterion fails.

use std::process::ExitCode;

use symspectra::selftest::selftest;

fn main() -> ExitCode {
    let report = selftest();
    for r in &report.results {
        println!("criterion {:>2}: {} ({})", r.id, if r.passed { "PASS" } else { "FAIL" }, r.name);
    }
    println!();
    print!("{}", report.text);
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
