//! Run a scenario file end to end: solve, invert, simulate, compare.
//!
//! cargo run --release --example compare_scenario -- scenarios/causal.toml

use dualrisk::cli::{compare, Scenario, Verdict};
use std::path::PathBuf;

fn main() -> dualrisk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/fgm_independent.toml"));
    let sc = Scenario::load(&path)?;
    println!("{} ({}), hash {}", path.display(), sc.model.kind(), &sc.hash()[..16]);
    let report = compare(&sc)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>7}", "x", "transform", "mc", "+-", "z");
    for r in &report.rows {
        println!("{:>6} {:>10.6} {:>10.6} {:>10.6} {:>7.2}", r.x, r.transform, r.mc_mean, r.mc_half_width, r.z);
    }
    println!("{}", if report.verdict == Verdict::Pass { "PASS" } else { "FAIL" });
    Ok(())
}
