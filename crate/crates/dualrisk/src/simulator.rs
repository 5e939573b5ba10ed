//! Path-by-path Monte Carlo for every model variant.
//!
//! Between jumps the surplus falls at unit rate. A path ends when the surplus
//! reaches 0 (ruin), climbs above `u_cap` (survival), or runs out of time or
//! jumps (censored). Each path owns its own ChaCha stream, and the per-path
//! contributions are reduced in index order by pairwise summation, so results
//! do not depend on the number of worker threads.

use crate::copulas::{sample_pair, CopulaSpec};
use crate::distributions::{InterarrivalSpec, PhaseDist};
use crate::error::{Error, Result};
use crate::models::{ModelSpec, TargetFunctional};
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Censored share above which an estimate is flagged.
pub const CENSORING_LIMIT: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathCaps {
    pub t_max: f64,
    pub u_cap: f64,
    pub max_jumps: u64,
}

impl PathCaps {
    /// Barrier at `max(10 x0, 40)`, generous horizon and jump budget.
    pub fn for_capital(x0: f64) -> Self {
        PathCaps { t_max: 1e7, u_cap: (10.0 * x0).max(40.0), max_jumps: 1_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !(self.u_cap > 0.0) || self.max_jumps == 0 {
            return Err(Error::InvalidParameter("path caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    Ruined(f64),
    Survived,
    Censored,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub n: u64,
    pub censored_fraction: f64,
    /// Too many censored paths; the mean is not trustworthy.
    pub flagged: bool,
}

fn exp(rate: f64) -> PhaseDist {
    PhaseDist::exponential(rate).expect("rate validated with the model")
}

fn fgm_pair<R: Rng + ?Sized>(theta: f64, b: &InterarrivalSpec, c: &PhaseDist, rng: &mut R) -> Result<(f64, f64)> {
    let cop = if theta == 0.0 { CopulaSpec::Independent } else { CopulaSpec::Fgm { theta } };
    sample_pair(&cop, b, c, rng)
}

fn gfgm_pair<R: Rng + ?Sized>(
    theta: f64,
    (k, bb, c, d): (u32, u32, u32, u32),
    b: &InterarrivalSpec,
    gain: &PhaseDist,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let cop = if theta == 0.0 { CopulaSpec::Independent } else { CopulaSpec::Gfgm { theta, k, b: bb, c, d } };
    sample_pair(&cop, b, gain, rng)
}

fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// What happens at the end of one interarrival.
enum Step {
    /// Surplus hits 0 after this much time.
    RuinAfter(f64),
    /// A jump after `wait` lands the surplus at `level` (ruin if `level <= 0`).
    Jump { wait: f64, level: f64 },
}

fn step<R: Rng + ?Sized>(spec: &ModelSpec, u: f64, rng: &mut R) -> Result<Step> {
    // `drift(w)` is the pre-jump surplus, or ruin if the wait is too long.
    let up = |w: f64, gamma: f64, y: f64| -> Step {
        if w >= u { Step::RuinAfter(u) } else { Step::Jump { wait: w, level: gamma * (u - w) + y } }
    };
    let down = |w: f64, beta: f64, y: f64| -> Step {
        if w >= u { Step::RuinAfter(u) } else { Step::Jump { wait: w, level: beta * (u - w) - y } }
    };
    Ok(match spec {
        ModelSpec::CausalProportional { interarrival, threshold, a0, a1, c0, c1 } => {
            let b = interarrival.sample(rng);
            let t = threshold.sample(rng);
            if t >= b { up(b, 1.0 + a0, c0.sample(rng)) } else { up(b, 1.0 + a1, c1.sample(rng)) }
        }
        ModelSpec::FgmProportional { interarrival, n, mu, theta, a } => {
            let c = PhaseDist::erlang(*n, *mu)?;
            let (b, y) = fgm_pair(*theta, interarrival, &c, rng)?;
            up(b, 1.0 + a, y)
        }
        ModelSpec::FgmMixture { interarrival, p, a, n, mu, theta1, m, nu, theta2 } => {
            if rng.random::<f64>() < *p {
                let (b, y) = fgm_pair(*theta1, interarrival, &PhaseDist::erlang(*n, *mu)?, rng)?;
                up(b, 1.0 + a, y)
            } else {
                let (b, y) = fgm_pair(*theta2, interarrival, &PhaseDist::erlang(*m, *nu)?, rng)?;
                up(b, 1.0, y)
            }
        }
        ModelSpec::GfgmProportional { interarrival, mu, theta, k, b, c, d, a } => {
            let (w, y) = gfgm_pair(*theta, (*k, *b, *c, *d), interarrival, &exp(*mu), rng)?;
            up(w, 1.0 + a, y)
        }
        ModelSpec::GfgmMixture { interarrival, p, a, gfgm1: g1, gfgm2: g2 } => {
            if rng.random::<f64>() < *p {
                let (w, y) = gfgm_pair(g1.theta, (g1.k, g1.b, g1.c, g1.d), interarrival, &exp(g1.mu), rng)?;
                up(w, 1.0 + a, y)
            } else {
                let (w, y) = gfgm_pair(g2.theta, (g2.k, g2.b, g2.c, g2.d), interarrival, &exp(g2.nu), rng)?;
                up(w, 1.0, y)
            }
        }
        ModelSpec::LinearDependence { lambda, mu, theta, a, c } => {
            let b = InterarrivalSpec::Phase(exp(*lambda));
            let (w, y) = fgm_pair(*theta, &b, &exp(*mu), rng)?;
            up(c * u + w, 1.0 + a, y)
        }
        ModelSpec::TwoSided { interarrival, p, k, a, m, beta, mu, nu } => {
            let w = interarrival.sample(rng);
            if rng.random::<f64>() < *p {
                let l = pick(k, rng.random());
                up(w, 1.0 + a[l], exp(*mu).sample(rng))
            } else {
                let h = pick(m, rng.random());
                down(w, 1.0 + beta[h], exp(*nu).sample(rng))
            }
        }
        ModelSpec::TwoSidedFgm { interarrival, p, a, beta, mu, nu, theta1, theta2 } => {
            if rng.random::<f64>() < *p {
                let (w, y) = fgm_pair(*theta1, interarrival, &exp(*mu), rng)?;
                up(w, 1.0 + a, y)
            } else {
                let (w, y) = fgm_pair(*theta2, interarrival, &exp(*nu), rng)?;
                down(w, 1.0 + beta, y)
            }
        }
        ModelSpec::UniformProportional { interarrival, mu, a, b } => {
            let w = interarrival.sample(rng);
            let v = a + (b - a) * rng.random::<f64>();
            up(w, 1.0 + v, exp(*mu).sample(rng))
        }
    })
}

/// Follow one path from capital `x0`.
pub fn simulate_path<R: Rng + ?Sized>(spec: &ModelSpec, x0: f64, rng: &mut R, caps: &PathCaps) -> Result<Outcome> {
    if x0 <= 0.0 {
        return Ok(Outcome::Ruined(0.0));
    }
    let mut u = x0;
    let mut t = 0.0;
    for _ in 0..caps.max_jumps {
        if u >= caps.u_cap {
            return Ok(Outcome::Survived);
        }
        match step(spec, u, rng)? {
            Step::RuinAfter(w) => {
                return Ok(if t + w > caps.t_max { Outcome::Censored } else { Outcome::Ruined(t + w) });
            }
            Step::Jump { wait, level } => {
                t += wait;
                if t > caps.t_max {
                    return Ok(Outcome::Censored);
                }
                if level <= 0.0 {
                    return Ok(Outcome::Ruined(t));
                }
                u = level;
            }
        }
    }
    Ok(if u >= caps.u_cap { Outcome::Survived } else { Outcome::Censored })
}

/// Pairwise (cascade) sum; the order of the input fixes the result.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// The generator for path `i` under `seed`.
pub fn path_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Run paths `0..n` and return their outcomes in index order.
pub fn simulate_many(spec: &ModelSpec, x0: f64, n: u64, caps: &PathCaps, seed: u64) -> Result<Vec<Outcome>> {
    spec.validate()?;
    caps.validate()?;
    (0..n).into_par_iter().map(|i| simulate_path(spec, x0, &mut path_rng(seed, i), caps)).collect()
}

fn contribution(o: &Outcome, alpha: Complex64) -> f64 {
    match o {
        Outcome::Ruined(t) => {
            if alpha == Complex64::new(0.0, 0.0) {
                1.0
            } else {
                (-alpha * t).exp().re
            }
        }
        _ => 0.0,
    }
}

/// Monte Carlo estimate of a target functional at capital `x0`.
pub fn estimate(
    spec: &ModelSpec,
    x0: f64,
    functional: &TargetFunctional,
    n: u64,
    caps: &PathCaps,
    seed: u64,
) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("n = {n} < 1000 paths")));
    }
    let outcomes = simulate_many(spec, x0, n, caps, seed)?;
    Ok(summarize(&outcomes, functional))
}

/// Mean, 95% half-width and censoring share of a batch of outcomes.
pub fn summarize(outcomes: &[Outcome], functional: &TargetFunctional) -> McEstimate {
    let alpha = functional.alpha();
    let vals: Vec<f64> = outcomes.iter().map(|o| contribution(o, alpha)).collect();
    let n = vals.len() as f64;
    let mean = pairwise_sum(&vals) / n;
    let dev: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if vals.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    let censored = outcomes.iter().filter(|o| matches!(o, Outcome::Censored)).count() as f64 / n;
    if censored > CENSORING_LIMIT {
        log::warn!("censored fraction {censored:.4} exceeds {CENSORING_LIMIT}");
    }
    McEstimate {
        mean,
        half_width: 1.96 * (var / n).sqrt(),
        n: vals.len() as u64,
        censored_fraction: censored,
        flagged: censored > CENSORING_LIMIT,
    }
}
