//! One line per acceptance criterion, at full Monte Carlo size.
//!
//! `DUALRISK_MC_N` lowers the path count for quick local runs.

use dualrisk::selfcheck::{self, SelfcheckOptions};

fn main() {
    let mut opts = SelfcheckOptions::default();
    if let Some(n) = std::env::var("DUALRISK_MC_N").ok().and_then(|v| v.parse().ok()) {
        opts.mc_n = n;
    }
    println!("acceptance: mc_n = {}, seed = {}", opts.mc_n, opts.seed);
    let results = selfcheck::run_all(&opts);
    for r in &results {
        println!(
            "{} criterion {}: {} [{:.1}s] {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds,
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
