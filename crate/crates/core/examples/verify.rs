//! The seeded oracle-agreement suite, as run by `decoh verify`.

use adiabatic_decoherence::verify::{run, VerifyOptions};

fn main() -> adiabatic_decoherence::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_011);
    let report = run(&VerifyOptions { seed, tolerance_override: None })?;
    print!("{report}");
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
