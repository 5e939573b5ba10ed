//! Solve a hand-built functional equation with two contracting maps.
//!
//! rho(s) = 0.6/(s+2) rho(s/2) + 0.5/(s+3) rho(s/3) + 1/(s+1)
//!
//! The lattice series handles the two maps; the same system is then
//! checked against the equation itself at a few complex points.

use dualrisk::feq::{equation_residual, rho_eval, series_eval_with, solve_unknowns, AffineMap, FeqSystem, JetFn, SeriesOptions};
use dualrisk::numerics::Jet;
use num_complex::Complex64;
use std::sync::Arc;

fn pole(k: f64, p: f64) -> JetFn {
    Arc::new(move |s: &Jet| Ok(s.add_scalar(Complex64::new(p, 0.0)).recip().scale_re(k)))
}

fn main() -> dualrisk::Result<()> {
    let sys = FeqSystem::from_parts(
        "two maps",
        vec![(pole(0.6, 2.0), AffineMap::scaling(0.5)), (pole(0.5, 3.0), AffineMap::scaling(1.0 / 3.0))],
        pole(1.0, 1.0),
        vec![],
        vec![],
    );
    let sol = solve_unknowns(&sys)?;
    println!("{:>18} {:>26} {:>10} {:>8}", "s", "rho(s)", "residual", "nodes");
    for s in [Complex64::new(0.5, 0.0), Complex64::new(1.0, 2.0), Complex64::new(4.0, -1.0), Complex64::new(0.1, 10.0)] {
        let v = rho_eval(&sol, s)?;
        let r = equation_residual(&sol, s)?;
        let stats = series_eval_with(&sys, s, 0, &SeriesOptions::default())?;
        println!("{:>18} {:>26} {:>10.1e} {:>8}", format!("{s:.2}"), format!("{v:.12}"), r.norm(), stats.nodes);
    }
    Ok(())
}
