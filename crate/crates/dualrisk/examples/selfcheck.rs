//! The acceptance checks, run as a library call.
//!
//! cargo run --release --example selfcheck -- 100000

use dualrisk::selfcheck::{run_all, SelfcheckOptions};

fn main() {
    let mut opts = SelfcheckOptions::default();
    if let Some(n) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        opts.mc_n = n;
    }
    let results = run_all(&opts);
    for r in &results {
        println!("{} {}: {} ({:.1}s)\n    {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.seconds, r.detail);
    }
    if results.iter().any(|r| !r.passed) {
        std::process::exit(1);
    }
}
