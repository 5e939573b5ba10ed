//! Numerical Laplace inversion.
//!
//! Two schemes: the Euler-summed Fourier series (Abate-Whitt), which uses one
//! real node and a ladder of complex nodes on a vertical line, and the
//! Gaver-Stehfest formula, which uses real nodes only and loses digits fast
//! in double precision.

use crate::error::{Error, Result};
use crate::numerics::{binomial, factorial};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// Discretization parameter of the Euler scheme; the aliasing error is about `e^(-A)`.
pub const EULER_A: f64 = 18.4;
/// Binomial averaging levels on top of the partial sums.
pub const EULER_AVERAGING: usize = 11;
/// Relative distance below which a node counts as sitting on a flagged point.
const NODE_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Euler,
    GaverStehfest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionParams {
    pub method: InversionMethod,
    pub terms: usize,
    pub precision_target: f64,
}

impl Default for InversionParams {
    fn default() -> Self {
        InversionParams { method: InversionMethod::Euler, terms: 40, precision_target: 1e-6 }
    }
}

impl InversionParams {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 10 {
            return Err(Error::InvalidParameter(format!("terms = {} < 10", self.terms)));
        }
        if self.method == InversionMethod::GaverStehfest && (self.terms % 2 == 1 || self.terms > 20) {
            return Err(Error::InvalidParameter(format!(
                "Gaver-Stehfest needs an even number of terms <= 20, got {}",
                self.terms
            )));
        }
        if !(self.precision_target > 0.0) {
            return Err(Error::InvalidParameter("precision_target must be positive".into()));
        }
        Ok(())
    }
}

/// Invert `f` at `x` with no flagged points.
pub fn invert<F>(f: F, x: f64, params: &InversionParams) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    invert_avoiding(f, x, params, &[])
}

/// Invert `f` at `x`, keeping the real Euler node away from `flagged`
/// (removable singularities where the transform is only known as a limit).
pub fn invert_avoiding<F>(f: F, x: f64, params: &InversionParams, flagged: &[f64]) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    params.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("inversion point x = {x} must be positive")));
    }
    match params.method {
        InversionMethod::Euler => {
            let real_node = EULER_A / (2.0 * x);
            if !hits(real_node, flagged) {
                return euler(&f, x, params.terms, EULER_A);
            }
            // Stretch the abscissa; both runs are valid so they must agree.
            let mut rng = ChaCha8Rng::seed_from_u64(x.to_bits());
            let mut runs = Vec::with_capacity(2);
            for _ in 0..16 {
                let factor = 1.0 + 0.1 * rng.random::<f64>();
                if hits(real_node * factor, flagged) {
                    continue;
                }
                runs.push(euler(&f, x, params.terms, EULER_A * factor)?);
                if runs.len() == 2 {
                    break;
                }
            }
            match runs.as_slice() {
                [a, b] => {
                    if (a - b).abs() > 1e-6 {
                        log::warn!("shifted inversions disagree at x = {x}: {a} vs {b}");
                    }
                    Ok(0.5 * (a + b))
                }
                _ => Err(Error::NodeOnPole(real_node)),
            }
        }
        InversionMethod::GaverStehfest => {
            let ln2 = std::f64::consts::LN_2;
            for k in 1..=params.terms {
                let node = k as f64 * ln2 / x;
                if hits(node, flagged) {
                    return Err(Error::NodeOnPole(node));
                }
            }
            gaver_stehfest(&f, x, params.terms)
        }
    }
}

/// Invert a ruin-probability transform and clamp to `[0, 1]`.
pub fn invert_probability<F>(f: F, x: f64, params: &InversionParams, flagged: &[f64]) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let v = invert_avoiding(f, x, params, flagged)?;
    if !(0.0..=1.0).contains(&v) {
        log::debug!("clamping inverted probability {v} at x = {x}");
    }
    Ok(v.clamp(0.0, 1.0))
}

fn hits(node: f64, flagged: &[f64]) -> bool {
    flagged.iter().any(|&p| (node - p).abs() <= NODE_GUARD * p.abs().max(1.0))
}

fn euler<F>(f: &F, x: f64, n: usize, a: f64) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let m = EULER_AVERAGING;
    let scale = (a / 2.0).exp() / x;
    let mut partial = Vec::with_capacity(n + m + 1);
    let mut sum = 0.5 * f(C64::new(a / (2.0 * x), 0.0))?.re;
    partial.push(sum);
    for k in 1..=(n + m) {
        let s = C64::new(a, 2.0 * std::f64::consts::PI * k as f64) / (2.0 * x);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * f(s)?.re;
        partial.push(sum);
    }
    let mut avg = 0.0;
    for j in 0..=m {
        avg += binomial(m, j) * partial[n + j];
    }
    Ok(scale * avg / 2f64.powi(m as i32))
}

fn stehfest_weight(k: usize, n: usize) -> f64 {
    let half = n / 2;
    let mut v = 0.0;
    for j in (k + 1) / 2..=k.min(half) {
        v += (j as f64).powi(half as i32) * factorial(2 * j)
            / (factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k));
    }
    let sign = if (k + half) % 2 == 0 { 1.0 } else { -1.0 };
    sign * v
}

fn gaver_stehfest<F>(f: &F, x: f64, n: usize) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let ln2 = std::f64::consts::LN_2;
    let mut acc = 0.0;
    for k in 1..=n {
        acc += stehfest_weight(k, n) * f(C64::new(k as f64 * ln2 / x, 0.0))?.re;
    }
    Ok(acc * ln2 / x)
}
