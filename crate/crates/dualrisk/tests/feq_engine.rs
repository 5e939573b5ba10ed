use dualrisk::feq::{
    lattice_coefficients, rho_eval, rho_jet, series_eval, series_eval_with, solve_unknowns, AffineMap, FeqSystem,
    JetFn, SeriesOptions, Strategy, UnknownDescriptor, UnknownSource,
};
use dualrisk::numerics::{binomial, Jet};
use dualrisk::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn konst(v: f64) -> JetFn {
    Arc::new(move |s: &Jet| Ok(s.lift(c(v, 0.0))))
}

/// `k / (s + p)`
fn pole(k: f64, p: f64) -> JetFn {
    Arc::new(move |s: &Jet| Ok(s.add_scalar(c(p, 0.0)).recip().scale_re(k)))
}

fn rational_pair() -> FeqSystem {
    FeqSystem::from_parts(
        "pair",
        vec![(pole(0.6, 2.0), AffineMap::scaling(0.5)), (pole(0.5, 3.0), AffineMap::scaling(1.0 / 3.0))],
        pole(1.0, 1.0),
        vec![],
        vec![],
    )
}

#[test]
fn geometric_series() {
    let sys = FeqSystem::from_parts("geo", vec![(konst(0.5), AffineMap::scaling(0.5))], konst(1.0), vec![], vec![]);
    let v = series_eval(&sys, c(1.3, 0.2), 0, 1e-14).unwrap();
    assert!((v.a.value() - c(2.0, 0.0)).norm() < 1e-12);
}

#[test]
fn single_map_products() {
    let sys = FeqSystem::from_parts("one", vec![(pole(1.0, 1.0), AffineMap::scaling(0.8))], konst(1.0), vec![], vec![]);
    let s = c(0.7, 1.1);
    let lat = lattice_coefficients(&sys, s, 6, 0).unwrap();
    for n in 0..=6u32 {
        let expect: Complex64 = (0..n).map(|j| 1.0 / (s * 0.8f64.powi(j as i32) + 1.0)).product();
        assert!((lat[&vec![n]].value() - expect).norm() < 1e-13);
    }
}

#[test]
fn constant_coefficients_binomial() {
    let sys = FeqSystem::from_parts(
        "const",
        vec![(konst(0.3), AffineMap::scaling(0.5)), (konst(0.2), AffineMap::scaling(0.25))],
        konst(1.0),
        vec![],
        vec![],
    );
    let lat = lattice_coefficients(&sys, c(1.0, 0.0), 5, 0).unwrap();
    for (idx, g) in &lat {
        let (l, r) = (idx[0] as usize, idx[1] as usize);
        let expect = binomial(l + r, l) * 0.3f64.powi(l as i32) * 0.2f64.powi(r as i32);
        assert!((g.value().re - expect).abs() < 1e-14);
        assert!(g.value().norm() <= binomial(l + r, l));
    }
}

fn brute_force(sys: &FeqSystem, s: Complex64, depth: usize) -> std::collections::BTreeMap<Vec<u32>, Complex64> {
    let m = sys.maps.len();
    let mut out = std::collections::BTreeMap::new();
    let words = m.pow(depth as u32);
    for w in 0..words {
        let mut p = s;
        let mut g = c(1.0, 0.0);
        let mut idx = vec![0u32; m];
        let mut code = w;
        for _ in 0..depth {
            let l = code % m;
            code /= m;
            let e = (sys.eval)(&Jet::constant(p, p, 0)).unwrap();
            g *= e.coeffs[l].value();
            p = sys.maps[l].apply(p);
            idx[l] += 1;
        }
        *out.entry(idx).or_insert(c(0.0, 0.0)) += g;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]
    #[test]
    fn lattice_matches_word_enumeration(re in 0.05f64..4.0, im in -3.0f64..3.0, depth in 0usize..=6) {
        let sys = rational_pair();
        let s = c(re, im);
        let lat = lattice_coefficients(&sys, s, depth, 0).unwrap();
        for (idx, g) in brute_force(&sys, s, depth) {
            let got = lat[&idx].value();
            prop_assert!((got - g).norm() <= 1e-9 * (1.0 + g.norm()), "{idx:?}: {got} vs {g}");
        }
    }

    #[test]
    fn series_is_affine_in_unknowns(re in 0.1f64..3.0, im in -2.0f64..2.0, u in -2.0f64..2.0) {
        let sys = FeqSystem::from_parts(
            "aff",
            vec![(pole(0.6, 2.0), AffineMap::scaling(0.5))],
            pole(1.0, 1.0),
            vec![pole(1.0, 5.0), konst(0.25)],
            vec![],
        );
        let v = series_eval(&sys, c(re, im), 0, 1e-14).unwrap();
        let u1 = [c(u, 0.0), c(0.3, -u)];
        let u2 = [u1[0] * 2.0, u1[1] * 2.0];
        let d = v.combine(&u2).value() - v.combine(&u1).value();
        let expect = v.b[0].value() * u1[0] + v.b[1].value() * u1[1];
        prop_assert!((d - expect).norm() < 1e-12);
    }
}

#[test]
fn non_commuting_maps_rejected() {
    let sys = FeqSystem::from_parts(
        "nc",
        vec![
            (konst(0.2), AffineMap::scaling(0.5)),
            (konst(0.2), AffineMap { scale: 0.5, shift: c(1.0, 0.0) }),
        ],
        konst(1.0),
        vec![],
        vec![],
    );
    assert!(matches!(lattice_coefficients(&sys, c(1.0, 0.0), 3, 0), Err(Error::NonCommutingMaps(_))));
    assert!(matches!(series_eval(&sys, c(1.0, 0.0), 0, 1e-12), Err(Error::NonCommutingMaps(_))));
}

#[test]
fn divergent_system_rejected() {
    let sys = FeqSystem::from_parts(
        "div",
        vec![(konst(0.6), AffineMap::scaling(0.5)), (konst(0.5), AffineMap::scaling(0.3))],
        konst(1.0),
        vec![],
        vec![],
    );
    assert!(matches!(series_eval(&sys, c(1.0, 0.0), 0, 1e-12), Err(Error::Divergence(k)) if k >= 1.0));
}

#[test]
fn tail_bound_tracks_truncation() {
    let sys = rational_pair();
    let s = c(1.0, 0.5);
    let coarse = series_eval(&sys, s, 0, 1e-6).unwrap();
    let fine = series_eval(&sys, s, 0, 1e-14).unwrap();
    assert!((coarse.a.value() - fine.a.value()).norm() <= coarse.tail + 1e-14);
    assert!(fine.depth > coarse.depth);
}

#[test]
fn ray_agrees_with_lattice() {
    // three maps keep the lattice small enough to compare against
    let sys = FeqSystem::from_parts(
        "tri",
        vec![
            (pole(0.5, 2.0), AffineMap::scaling(0.5)),
            (pole(0.4, 3.0), AffineMap::scaling(0.7)),
            (konst(0.1), AffineMap::scaling(0.6)),
        ],
        pole(1.0, 1.0),
        vec![pole(2.0, 4.0)],
        vec![],
    );
    let opts = SeriesOptions { tol: 1e-13, max_nodes: 2_000_000, force_ray: false };
    let ray = SeriesOptions { force_ray: true, ..opts };
    for s in [c(1.0, 0.0), c(0.3, 2.0), c(25.0, -40.0)] {
        let a = series_eval_with(&sys, s, 2, &opts).unwrap();
        let b = series_eval_with(&sys, s, 2, &ray).unwrap();
        assert_eq!(a.strategy, Strategy::Lattice);
        assert_eq!(b.strategy, Strategy::Ray);
        for k in 0..=2 {
            assert!((a.a.coeff(k) - b.a.coeff(k)).norm() < 1e-9, "A_{k} at {s}");
            assert!((a.b[0].coeff(k) - b.b[0].coeff(k)).norm() < 1e-9, "B_{k} at {s}");
        }
    }
}

/// Manufactured equation whose solution is `1/(1+s)`, with one value and one
/// derivative unknown.
fn manufactured() -> FeqSystem {
    let truth = |s: &Jet| s.add_scalar(c(1.0, 0.0)).recip();
    let h1 = pole(1.0, 5.0);
    let h2: JetFn = Arc::new(|s: &Jet| Ok(*s * s.add_scalar(c(4.0, 0.0)).powi(-2)));
    let (h1c, h2c) = (h1.clone(), h2.clone());
    let h0: JetFn = Arc::new(move |s: &Jet| {
        let r1 = truth(&s.scale_re(0.5));
        let r2 = truth(&s.scale_re(1.0 / 3.0));
        let c1 = s.add_scalar(c(2.0, 0.0)).recip().scale_re(0.3);
        Ok(truth(s) - c1 * r1 - r2.scale_re(0.2) - h1c(s)?.scale_re(0.5) - h2c(s)?.scale_re(-0.25))
    });
    FeqSystem::from_parts(
        "manufactured",
        vec![(pole(0.3, 2.0), AffineMap::scaling(0.5)), (konst(0.2), AffineMap::scaling(1.0 / 3.0))],
        h0,
        vec![h1, h2],
        vec![
            UnknownDescriptor { point: c(1.0, 0.0), derivative_order: 0, label: "rho(1)".into(), source: UnknownSource::Point },
            UnknownDescriptor { point: c(1.0, 0.0), derivative_order: 1, label: "rho'(1)".into(), source: UnknownSource::Point },
        ],
    )
}

#[test]
fn collocation_recovers_manufactured_solution() {
    let sol = solve_unknowns(&manufactured()).unwrap();
    assert!((sol.resolved_unknowns[0] - c(0.5, 0.0)).norm() < 1e-11);
    assert!((sol.resolved_unknowns[1] - c(-0.25, 0.0)).norm() < 1e-11);
    assert!(sol.residual < 1e-12);
    for s in [c(3.0, 0.0), c(2.0, 3.0), c(0.01, -7.0)] {
        let r = rho_eval(&sol, s).unwrap();
        assert!((r - 1.0 / (s + 1.0)).norm() < 1e-11, "{s}");
    }
    let j = rho_jet(&sol, c(2.0, 0.0), 3).unwrap();
    assert!((j.derivative(2) - c(2.0 / 27.0, 0.0)).norm() < 1e-10);
}

#[test]
fn pole_guard_rotates_and_recovers() {
    let mut sys = manufactured();
    sys.poles = vec![c(0.75, 0.0)];
    let sol = solve_unknowns(&sys).unwrap();
    // s/4 lands on the guarded point; the analytic total must be unaffected
    let r = rho_eval(&sol, c(3.0, 0.0)).unwrap();
    assert!((r - 0.25).norm() < 1e-9, "{r}");
}

#[test]
fn count_mismatch_reported() {
    let mut sys = manufactured();
    sys.unknowns[1].source = UnknownSource::Root;
    assert!(matches!(solve_unknowns(&sys), Err(Error::CountMismatch { expected: 1, found: 0 })));
}
