//! Identity suite on a scene file (default: the bundled two-gap scene).

use finite_gap::cli::SceneConfig;
use finite_gap::verify::{identity_suite, SuiteOptions};
use std::path::PathBuf;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/scenes/two_gap.json")));
    let sc = SceneConfig::load(&path).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(e.code());
    });
    let rep = identity_suite(&sc.set, &sc.divisor, sc.cov, SuiteOptions::default()).expect("suite");
    for c in &rep.checks {
        println!("{:<40} {:>12.3e} <= {:<8.1e} {}", c.name, c.measured, c.tolerance, if c.passed { "pass" } else { "FAIL" });
    }
    std::process::exit(if rep.all_passed { 0 } else { 4 });
}
