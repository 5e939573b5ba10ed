//! Reference parameter sets: one per model variant, plus the calibration
//! scenarios used to compare the transform against simulation.

use crate::distributions::{InterarrivalSpec, PhaseDist};
use crate::models::{GfgmAdditive, GfgmGain, ModelSpec};

fn exp(rate: f64) -> PhaseDist {
    PhaseDist::exponential(rate).expect("positive rate")
}

fn erlang(n: u32, rate: f64) -> PhaseDist {
    PhaseDist::erlang(n, rate).expect("positive rate")
}

fn b_exp() -> InterarrivalSpec {
    InterarrivalSpec::Phase(exp(1.0))
}

fn b_erlang() -> InterarrivalSpec {
    InterarrivalSpec::Phase(erlang(2, 2.0))
}

/// One representative of every variant, with exponential or Erlang
/// interarrivals, rates near 1, `a` in {0.25, 0.5} and `theta` in {-0.5, 0, 0.5}.
pub fn variants() -> Vec<ModelSpec> {
    vec![
        ModelSpec::CausalProportional {
            interarrival: b_exp(),
            threshold: InterarrivalSpec::Phase(erlang(2, 2.0)),
            a0: 0.5,
            a1: 0.25,
            c0: exp(1.0),
            c1: PhaseDist::hyperexponential(&[(0.4, 1.0), (0.6, 2.0)]).expect("valid mixture"),
        },
        ModelSpec::FgmProportional { interarrival: b_erlang(), n: 2, mu: 2.0, theta: 0.5, a: 0.5 },
        ModelSpec::FgmMixture {
            interarrival: b_exp(),
            p: 0.6,
            a: 0.5,
            n: 1,
            mu: 1.0,
            theta1: -0.5,
            m: 1,
            nu: 1.5,
            theta2: 0.5,
        },
        ModelSpec::GfgmProportional { interarrival: b_exp(), mu: 1.0, theta: 0.5, k: 1, b: 2, c: 2, d: 1, a: 0.25 },
        ModelSpec::GfgmMixture {
            interarrival: b_exp(),
            p: 0.6,
            a: 0.5,
            gfgm1: GfgmGain { mu: 1.0, theta: 0.5, k: 1, b: 1, c: 1, d: 1 },
            gfgm2: GfgmAdditive { nu: 1.5, theta: -0.5, k: 1, b: 2, c: 1, d: 1 },
        },
        ModelSpec::LinearDependence { lambda: 1.0, mu: 1.0, theta: 0.5, a: 0.5, c: 0.1 },
        ModelSpec::TwoSided {
            interarrival: b_exp(),
            p: 0.8,
            k: vec![0.5, 0.5],
            a: vec![0.25, 0.5],
            m: vec![1.0],
            beta: vec![0.25],
            mu: 1.0,
            nu: 2.0,
        },
        ModelSpec::TwoSidedFgm {
            interarrival: b_exp(),
            p: 0.7,
            a: 0.5,
            beta: 0.25,
            mu: 1.0,
            nu: 2.0,
            theta1: 0.5,
            theta2: -0.5,
        },
        ModelSpec::UniformProportional { interarrival: b_exp(), mu: 1.0, a: 0.25, b: 0.5 },
    ]
}

/// Scenarios where the inverted ruin probability is compared with Monte Carlo.
pub fn calibration() -> Vec<(&'static str, ModelSpec)> {
    let fgm = |theta: f64| ModelSpec::FgmProportional { interarrival: b_exp(), n: 1, mu: 1.0, theta, a: 0.5 };
    vec![
        ("fgm_theta_neg", fgm(-0.5)),
        ("fgm_theta_zero", fgm(0.0)),
        ("fgm_theta_pos", fgm(0.5)),
        ("causal", variants().swap_remove(0)),
        (
            "two_sided",
            ModelSpec::TwoSided {
                interarrival: b_exp(),
                p: 0.8,
                k: vec![1.0],
                a: vec![0.5],
                m: vec![1.0],
                beta: vec![0.25],
                mu: 1.0,
                nu: 2.0,
            },
        ),
        ("uniform", ModelSpec::UniformProportional { interarrival: b_exp(), mu: 1.0, a: 0.5, b: 1.0 }),
    ]
}
