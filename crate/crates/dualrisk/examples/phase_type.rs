//! Mixed-Erlang distributions: moments, transforms and numerical inversion.

use dualrisk::distributions::PhaseDist;
use dualrisk::inversion::{invert, InversionParams};
use num_complex::Complex64;

fn main() -> dualrisk::Result<()> {
    let dists = [
        ("Exp(1)", PhaseDist::exponential(1.0)?),
        ("Erlang(3, 2)", PhaseDist::erlang(3, 2.0)?),
        ("H2(0.3/0.5, 0.7/3)", PhaseDist::hyperexponential(&[(0.3, 0.5), (0.7, 3.0)])?),
    ];
    let params = InversionParams::default();
    for (name, d) in &dists {
        println!("{name}: mean {:.4}, variance {:.4}, median {:.4}", d.mean(), d.variance(), d.quantile(0.5));
        for x in [0.5, 1.0, 2.0] {
            let inv = invert(|s: Complex64| Ok(d.lst(s)? / s), x, &params)?;
            println!("    F({x}) = {:.10}   inverted {inv:.10}", d.cdf(x));
        }
    }
    Ok(())
}
