//! Laplace inversion against closed-form pairs and solved ruin transforms.

use dualrisk::catalog;
use dualrisk::distributions::PhaseDist;
use dualrisk::feq::{rho_eval, solve_unknowns};
use dualrisk::inversion::{invert, invert_avoiding, invert_probability, InversionMethod, InversionParams, EULER_A};
use dualrisk::models::build_ruin_system;
use dualrisk::Error;
use num_complex::Complex64;

type C64 = Complex64;

fn euler() -> InversionParams {
    InversionParams::default()
}

#[test]
fn exponential_pair() {
    let v = invert(|s| Ok(1.0 / (s + 1.0)), 1.0, &euler()).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-6, "{v}");
}

#[test]
fn constant_original() {
    let v = invert(|s| Ok(1.0 / s), 5.0, &euler()).unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn double_pole_pair() {
    let v = invert(|s| Ok(1.0 / ((s + 1.0) * (s + 1.0))), 2.0, &euler()).unwrap();
    assert!((v - 2.0 * (-2.0f64).exp()).abs() < 1e-6, "{v}");
}

#[test]
fn phase_type_cdfs_are_recovered() {
    let dists = [
        PhaseDist::exponential(1.0).unwrap(),
        PhaseDist::erlang(3, 2.0).unwrap(),
        PhaseDist::hyperexponential(&[(0.3, 0.5), (0.7, 3.0)]).unwrap(),
    ];
    for d in &dists {
        for x in [0.5, 1.0, 2.0, 5.0] {
            let v = invert(|s: C64| Ok(d.lst(s)? / s), x, &euler()).unwrap();
            assert!((v - d.cdf(x)).abs() < 1e-6, "{d:?} at {x}: {v} vs {}", d.cdf(x));
        }
    }
}

#[test]
fn gaver_stehfest_is_a_usable_alternative() {
    let p = InversionParams { method: InversionMethod::GaverStehfest, terms: 14, precision_target: 1e-4 };
    let v = invert(|s| Ok(1.0 / (s + 1.0)), 1.0, &p).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-4, "{v}");
}

#[test]
fn too_few_terms_are_rejected() {
    let p = InversionParams { terms: 8, ..euler() };
    assert!(matches!(invert(|s| Ok(1.0 / s), 1.0, &p), Err(Error::InvalidParameter(_))));
}

#[test]
fn flagged_real_node_is_shifted() {
    let x = 2.0;
    let node = EULER_A / (2.0 * x);
    let f = |s: C64| Ok(1.0 / (s + 1.0));
    let plain = invert(f, x, &euler()).unwrap();
    let shifted = invert_avoiding(f, x, &euler(), &[node]).unwrap();
    assert!((plain - shifted).abs() < 1e-6, "{plain} vs {shifted}");
}

#[test]
fn gaver_node_on_flagged_point_fails() {
    let p = InversionParams { method: InversionMethod::GaverStehfest, terms: 12, precision_target: 1e-4 };
    let x = 1.0;
    let node = 3.0 * std::f64::consts::LN_2 / x;
    assert!(matches!(invert_avoiding(|s| Ok(1.0 / s), x, &p, &[node]), Err(Error::NodeOnPole(_))));
}

#[test]
fn probabilities_are_clamped() {
    // 1.0000001 / s inverts to slightly above one.
    let v = invert_probability(|s| Ok(1.0000001 / s), 1.0, &euler(), &[]).unwrap();
    assert_eq!(v, 1.0);
}

#[test]
fn inverted_ruin_probability_is_nonincreasing() {
    let grid: Vec<f64> = (1..=8).map(|i| 0.5 * i as f64).collect();
    for spec in catalog::variants() {
        let sol = solve_unknowns(&build_ruin_system(&spec).unwrap()).unwrap();
        let r: Vec<f64> = grid.iter().map(|&x| invert_probability(|s| rho_eval(&sol, s), x, &euler(), &[]).unwrap()).collect();
        for w in r.windows(2) {
            assert!(w[1] <= w[0] + 2e-3, "{}: {:?}", spec.kind(), r);
        }
        assert!(r[0] < 1.0 && r[r.len() - 1] > 0.0);
    }
}
