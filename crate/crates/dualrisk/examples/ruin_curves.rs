//! Ruin probability curves for every model family in the catalog.
//!
//! Each model's transform is solved once and then inverted on a grid of
//! initial capitals.

use dualrisk::catalog;
use dualrisk::feq::{rho_eval, solve_unknowns};
use dualrisk::inversion::{invert_probability, InversionParams};
use dualrisk::models::build_ruin_system;

fn main() -> dualrisk::Result<()> {
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    print!("{:<22}", "model");
    for x in grid {
        print!("{:>9}", format!("x={x}"));
    }
    println!();
    let params = InversionParams::default();
    for spec in catalog::variants() {
        let sol = solve_unknowns(&build_ruin_system(&spec)?)?;
        print!("{:<22}", spec.kind());
        for x in grid {
            print!("{:>9.5}", invert_probability(|s| rho_eval(&sol, s), x, &params, &[])?);
        }
        println!();
    }
    Ok(())
}
