//! Per-variant decomposition into weighted kernel pairs.

use super::{gfgm_copula, BuildOptions, ModelSpec};
use crate::copulas::CopulaSpec;
use crate::distributions::{ExpPoly, InterarrivalSpec, PhaseDist, Weight, WeightPart};
use crate::error::{Error, Result};
use crate::numerics::gauss_legendre_nodes;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Branch {
    /// Level becomes `gamma u + y`.
    Up(f64),
    /// Level becomes `beta u - y`, ruin when that is not positive.
    Down(f64),
}

#[derive(Clone, Debug)]
pub(crate) struct Pair {
    pub weight: Weight,
    pub kernel: ExpPoly,
    pub branch: Branch,
}

/// `R(x) = E[e^{-alpha T}; no jump before kappa x] + sum over pairs`, with
/// the jump epoch delayed by `c x` (only the linear-dependence model has
/// `c > 0`, `kappa = 1 - c`).
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub pairs: Vec<Pair>,
    pub survival: Weight,
    pub kappa: f64,
    pub c: f64,
}

fn unsupported(e: Error) -> Error {
    match e {
        Error::NoDensity => Error::UnsupportedCombination("dependence on a deterministic interarrival has no density".into()),
        other => other,
    }
}

/// `(weight, kernel)` pairs of a copula-coupled `(B, C)`.
fn coupled(copula: &CopulaSpec, b: &InterarrivalSpec, c: &PhaseDist) -> Result<Vec<(Weight, ExpPoly)>> {
    if copula.theta() == 0.0 {
        return Ok(vec![(b.weight(), c.pdf_exppoly())]);
    }
    let bd = b.density().map_err(unsupported)?;
    Ok(copula.pairs(bd, c).into_iter().map(|(w, k)| (Weight::dense(w), k)).collect())
}

fn push(out: &mut Vec<Pair>, pairs: Vec<(Weight, ExpPoly)>, scale: f64, branch: Branch) {
    if scale == 0.0 {
        return;
    }
    for (w, k) in pairs {
        out.push(Pair { weight: w.scale(scale), kernel: k, branch });
    }
}

/// Split the interarrival law by the threshold: `T >= B` goes to branch 0.
pub fn causal_weights(b: &InterarrivalSpec, t: &InterarrivalSpec) -> (Weight, Weight) {
    match b {
        InterarrivalSpec::Deterministic(d) => {
            let m0 = t.tail_incl(*d);
            (
                Weight(vec![WeightPart::Atom { mass: m0, at: *d }]),
                Weight(vec![WeightPart::Atom { mass: 1.0 - m0, at: *d }]),
            )
        }
        InterarrivalSpec::Phase(bp) => {
            let f = bp.pdf_exppoly();
            let w0 = match t {
                InterarrivalSpec::Phase(tp) => Weight::dense(f.mul(&tp.survival_exppoly())),
                InterarrivalSpec::Deterministic(d) => Weight(vec![WeightPart::Below(f.clone(), *d)]),
            };
            let w1 = Weight::dense(f).add(&w0.scale(-1.0));
            (w0, w1)
        }
    }
}

fn exp(rate: f64) -> Result<PhaseDist> {
    PhaseDist::exponential(rate)
}

pub(crate) fn layout(spec: &ModelSpec, opts: &BuildOptions) -> Result<Layout> {
    spec.validate()?;
    let mut pairs = Vec::new();
    let plain = |b: &InterarrivalSpec| Layout { pairs: Vec::new(), survival: b.survival_weight(), kappa: 1.0, c: 0.0 };
    let mut out = match spec {
        ModelSpec::CausalProportional { interarrival, threshold, a0, a1, c0, c1 } => {
            let (w0, w1) = causal_weights(interarrival, threshold);
            push(&mut pairs, vec![(w0, c0.pdf_exppoly())], 1.0, Branch::Up(1.0 + a0));
            push(&mut pairs, vec![(w1, c1.pdf_exppoly())], 1.0, Branch::Up(1.0 + a1));
            plain(interarrival)
        }
        ModelSpec::FgmProportional { interarrival, n, mu, theta, a } => {
            let c = PhaseDist::erlang(*n, *mu)?;
            push(&mut pairs, coupled(&CopulaSpec::Fgm { theta: *theta }, interarrival, &c)?, 1.0, Branch::Up(1.0 + a));
            plain(interarrival)
        }
        ModelSpec::FgmMixture { interarrival, p, a, n, mu, theta1, m, nu, theta2 } => {
            let c = PhaseDist::erlang(*n, *mu)?;
            let d = PhaseDist::erlang(*m, *nu)?;
            push(&mut pairs, coupled(&CopulaSpec::Fgm { theta: *theta1 }, interarrival, &c)?, *p, Branch::Up(1.0 + a));
            push(&mut pairs, coupled(&CopulaSpec::Fgm { theta: *theta2 }, interarrival, &d)?, 1.0 - p, Branch::Up(1.0));
            plain(interarrival)
        }
        ModelSpec::GfgmProportional { interarrival, mu, theta, k, b, c, d, a } => {
            let cop = gfgm_copula(*theta, *k, *b, *c, *d);
            push(&mut pairs, coupled(&cop, interarrival, &exp(*mu)?)?, 1.0, Branch::Up(1.0 + a));
            plain(interarrival)
        }
        ModelSpec::GfgmMixture { interarrival, p, a, gfgm1: g1, gfgm2: g2 } => {
            let c1 = gfgm_copula(g1.theta, g1.k, g1.b, g1.c, g1.d);
            let c2 = gfgm_copula(g2.theta, g2.k, g2.b, g2.c, g2.d);
            push(&mut pairs, coupled(&c1, interarrival, &exp(g1.mu)?)?, *p, Branch::Up(1.0 + a));
            push(&mut pairs, coupled(&c2, interarrival, &exp(g2.nu)?)?, 1.0 - p, Branch::Up(1.0));
            plain(interarrival)
        }
        ModelSpec::LinearDependence { lambda, mu, theta, a, c } => {
            let b = InterarrivalSpec::Phase(exp(*lambda)?);
            push(&mut pairs, coupled(&CopulaSpec::Fgm { theta: *theta }, &b, &exp(*mu)?)?, 1.0, Branch::Up(1.0 + a));
            Layout { pairs: Vec::new(), survival: b.survival_weight(), kappa: 1.0 - c, c: *c }
        }
        ModelSpec::TwoSided { interarrival, p, k, a, m, beta, mu, nu } => {
            let q = 1.0 - p;
            let cu = exp(*mu)?.pdf_exppoly();
            let cd = exp(*nu)?.pdf_exppoly();
            for (kl, al) in k.iter().zip(a) {
                push(&mut pairs, vec![(interarrival.weight(), cu.clone())], p * kl, Branch::Up(1.0 + al));
            }
            for (mh, bh) in m.iter().zip(beta) {
                push(&mut pairs, vec![(interarrival.weight(), cd.clone())], q * mh, Branch::Down(1.0 + bh));
            }
            plain(interarrival)
        }
        ModelSpec::TwoSidedFgm { interarrival, p, a, beta, mu, nu, theta1, theta2 } => {
            let up = coupled(&CopulaSpec::Fgm { theta: *theta1 }, interarrival, &exp(*mu)?)?;
            let down = coupled(&CopulaSpec::Fgm { theta: *theta2 }, interarrival, &exp(*nu)?)?;
            push(&mut pairs, up, *p, Branch::Up(1.0 + a));
            push(&mut pairs, down, 1.0 - p, Branch::Down(1.0 + beta));
            plain(interarrival)
        }
        ModelSpec::UniformProportional { interarrival, mu, a, b } => {
            let (nodes, weights) = gauss_legendre_nodes(*a, *b, opts.uniform_nodes);
            let cu = exp(*mu)?.pdf_exppoly();
            for (v, w) in nodes.iter().zip(&weights) {
                push(&mut pairs, vec![(interarrival.weight(), cu.clone())], w / (b - a), Branch::Up(1.0 + v));
            }
            plain(interarrival)
        }
    };
    out.pairs = pairs.into_iter().filter(|p| !p.weight.is_zero() && !p.kernel.is_empty()).collect();
    Ok(out)
}
