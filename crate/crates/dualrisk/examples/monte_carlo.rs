//! Monte Carlo ruin estimates with confidence half-widths.
//!
//! Paths are seeded per index, so the numbers below do not change with
//! the size of the thread pool.

use dualrisk::catalog;
use dualrisk::models::TargetFunctional;
use dualrisk::simulator::{estimate, PathCaps};

fn main() -> dualrisk::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let x = 1.0;
    let caps = PathCaps::for_capital(x);
    println!("{n} paths from x = {x}, barrier {}", caps.u_cap);
    for spec in catalog::variants() {
        let ruin = estimate(&spec, x, &TargetFunctional::RuinProbability, n, &caps, 2024)?;
        let line = format!("{:<22} psi = {:.5} +- {:.5}", spec.kind(), ruin.mean, ruin.half_width);
        if spec.supports_time() {
            let t = estimate(&spec, x, &TargetFunctional::RuinTimeLst { alpha: 1.0, alpha_im: 0.0 }, n, &caps, 2024)?;
            println!("{line}   E[e^-tau; ruin] = {:.5} +- {:.5}", t.mean, t.half_width);
        } else {
            println!("{line}");
        }
    }
    Ok(())
}
