//! Gauss-Legendre quadrature.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_nodes(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_rule(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// `int_a^b f` with an `nodes`-point rule.
pub fn gauss_legendre<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, nodes: usize) -> Complex64 {
    assert!(a < b && nodes >= 2, "need a < b and at least two nodes");
    let (x, w) = gauss_legendre_nodes(a, b, nodes);
    x.iter().zip(&w).map(|(xi, wi)| f(*xi) * *wi).sum()
}

/// Composite rule: `panels` equal sub-intervals, each with `nodes` points.
pub fn gauss_legendre_composite<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    nodes: usize,
    panels: usize,
) -> Complex64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| gauss_legendre(&f, a + k as f64 * h, a + (k + 1) as f64 * h, nodes))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exact_for_quadratic_with_two_nodes() {
        let v = gauss_legendre(|x| re(x * x), 0.0, 1.0, 2);
        assert!((v.re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_gives_logarithm() {
        let v = gauss_legendre(|x| re(1.0 / (1.0 + x)), 0.5, 1.0, 16);
        assert!((v.re - (2.0f64 / 1.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn exponential() {
        let v = gauss_legendre(|x| re(x.exp()), 0.0, 1.0, 8);
        assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn polynomial_exactness_degree_2n_minus_1() {
        for n in 2..12 {
            let deg = 2 * n - 1;
            let v = gauss_legendre(|x| re(x.powi(deg as i32)), 0.0, 2.0, n);
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((v.re - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn weights_sum_to_length() {
        for n in [1, 3, 24, 48, 64] {
            let (_, w) = gauss_legendre_nodes(0.5, 1.0, n);
            assert!((w.iter().sum::<f64>() - 0.5).abs() < 1e-14);
        }
    }
}
