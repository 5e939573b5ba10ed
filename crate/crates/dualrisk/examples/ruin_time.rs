//! Laplace transform of the ruin time.
//!
//! With no growth, no delay and independent gains the ruin time started
//! from capital x is an M/M/1 busy period, whose transform
//! `exp(-eta x)` is known in closed form. Turning on the proportional
//! growth lowers the transform at every capital.

use dualrisk::feq::{rho_eval, solve_unknowns};
use dualrisk::inversion::{invert_avoiding, InversionParams};
use dualrisk::models::{assemble, BuildOptions, ModelSpec};
use num_complex::Complex64;

fn main() -> dualrisk::Result<()> {
    let (lambda, mu, alpha): (f64, f64, f64) = (1.0, 1.5, 0.5);
    let b = mu - lambda - alpha;
    let eta = 0.5 * (-b + (b * b + 4.0 * alpha * mu).sqrt());
    let params = InversionParams::default();

    println!("E exp(-{alpha} tau), gains at rate {lambda}, sizes Exp({mu})");
    println!("{:>6} {:>12} {:>12} {:>12}", "x", "busy period", "closed form", "a = 0.5");
    let solve = |a: f64| -> dualrisk::Result<_> {
        let spec = ModelSpec::LinearDependence { lambda, mu, theta: 0.0, a, c: 0.0 };
        solve_unknowns(&assemble(&spec, Complex64::new(alpha, 0.0), &BuildOptions::default())?.system)
    };
    let plain = solve(0.0)?;
    let grown = solve(0.5)?;
    for x in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let v0 = invert_avoiding(|s| rho_eval(&plain, s), x, &params, &[])?;
        let v1 = invert_avoiding(|s| rho_eval(&grown, s), x, &params, &[])?;
        println!("{x:>6} {v0:>12.8} {:>12.8} {v1:>12.8}", (-eta * x).exp());
    }
    Ok(())
}
