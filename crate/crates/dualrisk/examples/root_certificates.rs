//! Right-half-plane roots behind the ruin-time transform.
//!
//! Each unknown boundary value pairs with a root of the divisor; the
//! argument principle confirms that none were missed.

use dualrisk::catalog;
use dualrisk::models::{assemble, BuildOptions, ModelSpec};
use num_complex::Complex64;

fn main() -> dualrisk::Result<()> {
    // Ruin probabilities (alpha = 0) for every family, then ruin-time
    // transforms where they are available.
    let mut cases: Vec<(ModelSpec, f64)> = catalog::variants().into_iter().map(|s| (s, 0.0)).collect();
    cases.extend(catalog::variants().into_iter().filter(|s| s.supports_time()).map(|s| (s, 0.5)));
    cases.push((ModelSpec::LinearDependence { lambda: 1.0, mu: 1.5, theta: 0.5, a: 0.0, c: 0.0 }, 0.5));
    for (spec, alpha) in cases {
        let name = format!("{} alpha={alpha}", spec.kind());
        match assemble(&spec, Complex64::new(alpha, 0.0), &BuildOptions::default())?.certificate {
            None => println!("{name:<30} no root equations"),
            Some(cert) => {
                println!("{name:<30} {} roots, winding number {}", cert.roots.len(), cert.winding_number);
                for (r, res) in cert.roots.iter().zip(&cert.residuals) {
                    println!("{:>24.10}   |residual| {res:.1e}", r);
                }
            }
        }
    }
    Ok(())
}
