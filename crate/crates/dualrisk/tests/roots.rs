//! Right-half-plane root counting and certificates.

use dualrisk::distributions::{InterarrivalSpec, PhaseDist};
use dualrisk::models::{assemble, BuildOptions, GfgmAdditive, GfgmGain, ModelSpec};
use dualrisk::numerics::Poly;
use dualrisk::roots::{count_rhp_zeros, rhp_roots, RootCertificate};
use dualrisk::Error;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly_from_roots(roots: &[Complex64]) -> Poly {
    roots.iter().fold(Poly::constant(c(1.0, 0.0)), |acc, z| acc.mul(&Poly::linear_power(*z, 1)))
}

fn check(cert: &RootCertificate, expected: usize) {
    assert_eq!(cert.roots.len(), expected, "roots {:?}", cert.roots);
    assert_eq!(cert.winding_number, expected as i64);
    assert!(cert.roots.iter().all(|z| z.re > 0.0));
    assert!(cert.residuals.iter().all(|r| *r < 1e-8), "residuals {:?}", cert.residuals);
}

fn certificate(spec: &ModelSpec, alpha: f64) -> RootCertificate {
    assemble(spec, c(alpha, 0.0), &BuildOptions::default()).unwrap().certificate.expect("identity branch")
}

fn b_exp() -> InterarrivalSpec {
    InterarrivalSpec::Phase(PhaseDist::exponential(1.0).unwrap())
}

#[test]
fn single_root() {
    let cert = rhp_roots(&poly_from_roots(&[c(1.0, 0.0)]), &Poly::constant(c(1.0, 0.0))).unwrap();
    check(&cert, 1);
    assert!((cert.roots[0] - 1.0).norm() < 1e-12);
}

#[test]
fn left_half_plane_roots_are_ignored() {
    let p = poly_from_roots(&[c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)]);
    let cert = rhp_roots(&p, &Poly::constant(c(1.0, 0.0))).unwrap();
    check(&cert, 2);
}

#[test]
fn conjugate_pairs_are_found() {
    let p = poly_from_roots(&[c(0.5, 2.0), c(0.5, -2.0), c(-1.0, 1.0), c(-1.0, -1.0)]);
    let cert = rhp_roots(&p, &Poly::constant(c(1.0, 0.0))).unwrap();
    check(&cert, 2);
    let im: f64 = cert.roots.iter().map(|z| z.im).sum();
    assert!(im.abs() < 1e-10);
}

#[test]
fn winding_count_of_a_rational_function() {
    // (s - 1)(s - 2) / (s + 1)^3: poles are outside the contour.
    let f = |s: Complex64| (s - 1.0) * (s - 2.0) / ((s + 1.0) * (s + 1.0) * (s + 1.0));
    assert_eq!(count_rhp_zeros(f, 10.0, 512).unwrap(), 2);
}

#[test]
fn zero_on_the_contour_is_reported() {
    let f = |s: Complex64| s - c(0.0, 1.0);
    assert!(matches!(count_rhp_zeros(f, 10.0, 512), Err(Error::OnContourZero(_))));
}

#[test]
fn fgm_mixture_has_3m_minus_1_roots() {
    for (m, expected) in [(1, 2), (2, 5)] {
        let spec = ModelSpec::FgmMixture {
            interarrival: b_exp(),
            p: 0.6,
            a: 0.5,
            n: 1,
            mu: 1.0,
            theta1: 0.3,
            m,
            nu: 1.5,
            theta2: 0.4,
        };
        check(&certificate(&spec, 0.0), expected);
    }
}

fn gfgm_mixture(c2: u32, d2: u32) -> ModelSpec {
    ModelSpec::GfgmMixture {
        interarrival: b_exp(),
        p: 0.6,
        a: 0.5,
        gfgm1: GfgmGain { mu: 1.0, theta: 0.5, k: 1, b: 1, c: 1, d: 1 },
        gfgm2: GfgmAdditive { nu: 1.5, theta: 0.4, k: 1, b: 1, c: c2, d: d2 },
    }
}

#[test]
fn gfgm_mixture_has_c2_plus_2_roots() {
    for c2 in [1, 2] {
        check(&certificate(&gfgm_mixture(c2, 2), 0.0), c2 as usize + 2);
    }
}

#[test]
fn gfgm_mixture_with_d2_one_loses_a_root() {
    // nu (d2 + i - 1) at i = 1 coincides with nu, so one pole (and root) fewer.
    for c2 in [1, 2] {
        check(&certificate(&gfgm_mixture(c2, 1), 0.0), c2 as usize + 1);
    }
}

#[test]
fn busy_period_equation_has_two_roots() {
    let spec = ModelSpec::LinearDependence { lambda: 1.0, mu: 1.5, theta: 0.5, a: 0.0, c: 0.0 };
    check(&certificate(&spec, 0.5), 2);
    // Independence collapses the tilt and one root with it.
    let spec = ModelSpec::LinearDependence { lambda: 1.0, mu: 1.5, theta: 0.0, a: 0.0, c: 0.0 };
    check(&certificate(&spec, 0.5), 1);
}
