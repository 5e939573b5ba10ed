//! The nine model variants and their translation into functional equations.
//!
//! Every variant reduces to the same one-step structure: the interarrival
//! density splits into weights `w_p(t)`, each paired with a kernel `g_p(y)`
//! on the jump and a branch rule (up: `gamma u + y`, down:
//! `[beta u - y]^+`). The generic assembler turns that layout into a
//! [`FeqSystem`], so the variants differ only in their layout.

mod builder;
mod layout;

pub use builder::{assemble, Assembly};
pub use layout::causal_weights;

use crate::copulas::CopulaSpec;
use crate::distributions::{InterarrivalSpec, PhaseDist};
use crate::error::{Error, Result};
use crate::feq::FeqSystem;
use crate::roots::RootCertificate;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Quadrature nodes used to discretize a uniform proportional factor.
pub const DEFAULT_UNIFORM_NODES: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfgmGain {
    pub mu: f64,
    pub theta: f64,
    pub k: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfgmAdditive {
    pub nu: f64,
    pub theta: f64,
    pub k: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Threshold rule: `T >= B` selects branch 0 (`a0`, `C0`), else branch 1.
    CausalProportional {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        #[serde(rename = "T")]
        threshold: InterarrivalSpec,
        a0: f64,
        a1: f64,
        #[serde(rename = "C0")]
        c0: PhaseDist,
        #[serde(rename = "C1")]
        c1: PhaseDist,
    },
    /// FGM-dependent `(B, C)` with `C ~ Erlang(n, mu)`.
    FgmProportional {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        n: u32,
        mu: f64,
        theta: f64,
        a: f64,
    },
    /// Proportional gain `(1+a)u + C` w.p. `p`, additive gain `D` otherwise.
    FgmMixture {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        p: f64,
        a: f64,
        n: u32,
        mu: f64,
        theta1: f64,
        m: u32,
        nu: f64,
        theta2: f64,
    },
    GfgmProportional {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        mu: f64,
        theta: f64,
        k: u32,
        b: u32,
        c: u32,
        d: u32,
        a: f64,
    },
    GfgmMixture {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        p: f64,
        a: f64,
        gfgm1: GfgmGain,
        gfgm2: GfgmAdditive,
    },
    /// Next gain arrives `c x + B` after reaching level `x`.
    LinearDependence {
        lambda: f64,
        mu: f64,
        theta: f64,
        a: f64,
        c: f64,
    },
    /// Up `(1+a_l)u + C` w.p. `p k_l`, down `[(1+beta_h)u - D]^+` w.p. `q m_h`.
    TwoSided {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        p: f64,
        k: Vec<f64>,
        a: Vec<f64>,
        m: Vec<f64>,
        beta: Vec<f64>,
        mu: f64,
        nu: f64,
    },
    TwoSidedFgm {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        p: f64,
        a: f64,
        beta: f64,
        mu: f64,
        nu: f64,
        theta1: f64,
        theta2: f64,
    },
    /// Proportional factor `V ~ U[a, b]`, `C ~ exp(mu)`.
    UniformProportional {
        #[serde(rename = "B")]
        interarrival: InterarrivalSpec,
        mu: f64,
        a: f64,
        b: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFunctional {
    RuinProbability,
    /// `E(e^{-alpha tau_x}; tau_x < inf)`.
    RuinTimeLst {
        alpha: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        alpha_im: f64,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl TargetFunctional {
    pub fn alpha(&self) -> Complex64 {
        match self {
            TargetFunctional::RuinProbability => Complex64::new(0.0, 0.0),
            TargetFunctional::RuinTimeLst { alpha, alpha_im } => Complex64::new(*alpha, *alpha_im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    pub uniform_nodes: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { uniform_nodes: DEFAULT_UNIFORM_NODES }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name}={p} is not a probability")))
    }
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name}={r} must be a positive rate")))
    }
}

fn check_factor(name: &str, a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name}={a}: proportional factors must be >= 0")))
    }
}

fn check_theta(name: &str, t: f64) -> Result<()> {
    if t.abs() < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name}={t} outside (-1, 1)")))
    }
}

fn check_stages(name: &str, n: u32) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be at least 1")))
    }
}

fn check_simplex(name: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("{name} must be nonnegative weights summing to 1")));
    }
    Ok(())
}

/// `ln((1+b)/(1+a)) < 1`, the convergence condition for a uniform factor.
pub fn uniform_guard(a: f64, b: f64) -> Result<f64> {
    let g = ((1.0 + b) / (1.0 + a)).ln();
    if g < 1.0 {
        Ok(g)
    } else {
        Err(Error::ConvergenceGuard(format!("ln((1+b)/(1+a)) = {g:.4} >= 1 for a={a}, b={b}")))
    }
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::CausalProportional { .. } => "causal_proportional",
            ModelSpec::FgmProportional { .. } => "fgm_proportional",
            ModelSpec::FgmMixture { .. } => "fgm_mixture",
            ModelSpec::GfgmProportional { .. } => "gfgm_proportional",
            ModelSpec::GfgmMixture { .. } => "gfgm_mixture",
            ModelSpec::LinearDependence { .. } => "linear_dependence",
            ModelSpec::TwoSided { .. } => "two_sided",
            ModelSpec::TwoSidedFgm { .. } => "two_sided_fgm",
            ModelSpec::UniformProportional { .. } => "uniform_proportional",
        }
    }

    /// Ruin-time transforms are available for these variants only.
    pub fn supports_time(&self) -> bool {
        matches!(
            self,
            ModelSpec::CausalProportional { .. } | ModelSpec::FgmProportional { .. } | ModelSpec::LinearDependence { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::CausalProportional { a0, a1, .. } => {
                check_factor("a0", *a0)?;
                check_factor("a1", *a1)
            }
            ModelSpec::FgmProportional { n, mu, theta, a, .. } => {
                check_stages("n", *n)?;
                check_rate("mu", *mu)?;
                check_theta("theta", *theta)?;
                check_factor("a", *a)
            }
            ModelSpec::FgmMixture { p, a, n, mu, theta1, m, nu, theta2, .. } => {
                check_prob("p", *p)?;
                check_factor("a", *a)?;
                check_stages("n", *n)?;
                check_stages("m", *m)?;
                check_rate("mu", *mu)?;
                check_rate("nu", *nu)?;
                check_theta("theta1", *theta1)?;
                check_theta("theta2", *theta2)
            }
            ModelSpec::GfgmProportional { mu, theta, k, b, c, d, a, .. } => {
                check_rate("mu", *mu)?;
                check_factor("a", *a)?;
                gfgm_copula(*theta, *k, *b, *c, *d).validate()
            }
            ModelSpec::GfgmMixture { p, a, gfgm1, gfgm2, .. } => {
                check_prob("p", *p)?;
                check_factor("a", *a)?;
                check_rate("gfgm1.mu", gfgm1.mu)?;
                check_rate("gfgm2.nu", gfgm2.nu)?;
                gfgm_copula(gfgm1.theta, gfgm1.k, gfgm1.b, gfgm1.c, gfgm1.d).validate()?;
                gfgm_copula(gfgm2.theta, gfgm2.k, gfgm2.b, gfgm2.c, gfgm2.d).validate()
            }
            ModelSpec::LinearDependence { lambda, mu, theta, a, c } => {
                check_rate("lambda", *lambda)?;
                check_rate("mu", *mu)?;
                check_theta("theta", *theta)?;
                check_factor("a", *a)?;
                if !(0.0..1.0).contains(c) {
                    return Err(invalid(format!("c={c} outside [0, 1)")));
                }
                Ok(())
            }
            ModelSpec::TwoSided { p, k, a, m, beta, mu, nu, .. } => {
                check_prob("p", *p)?;
                check_rate("mu", *mu)?;
                check_rate("nu", *nu)?;
                if k.len() != a.len() || m.len() != beta.len() {
                    return Err(invalid("k/a and m/beta must have matching lengths"));
                }
                if *p > 0.0 {
                    check_simplex("k", k)?;
                }
                if *p < 1.0 {
                    check_simplex("m", m)?;
                }
                a.iter().try_for_each(|x| check_factor("a", *x))?;
                beta.iter().try_for_each(|x| check_factor("beta", *x))
            }
            ModelSpec::TwoSidedFgm { p, a, beta, mu, nu, theta1, theta2, .. } => {
                check_prob("p", *p)?;
                check_factor("a", *a)?;
                check_factor("beta", *beta)?;
                check_rate("mu", *mu)?;
                check_rate("nu", *nu)?;
                check_theta("theta1", *theta1)?;
                check_theta("theta2", *theta2)
            }
            ModelSpec::UniformProportional { mu, a, b, .. } => {
                check_rate("mu", *mu)?;
                if !(*a > 0.0 && a < b && b.is_finite()) {
                    return Err(invalid(format!("uniform support needs 0 < a < b, got [{a}, {b}]")));
                }
                uniform_guard(*a, *b).map(|_| ())
            }
        }
    }
}

pub(crate) fn gfgm_copula(theta: f64, k: u32, b: u32, c: u32, d: u32) -> CopulaSpec {
    CopulaSpec::Gfgm { theta, k, b, c, d }
}

pub fn build_ruin_system(spec: &ModelSpec) -> Result<FeqSystem> {
    Ok(assemble(spec, Complex64::new(0.0, 0.0), &BuildOptions::default())?.system)
}

pub fn build_time_system(spec: &ModelSpec, alpha: Complex64) -> Result<FeqSystem> {
    if !spec.supports_time() {
        return Err(Error::UnsupportedFunctional(format!("ruin-time transform for {}", spec.kind())));
    }
    if !(alpha.re >= 0.0) {
        return Err(invalid(format!("alpha={alpha} needs Re >= 0")));
    }
    Ok(assemble(spec, alpha, &BuildOptions::default())?.system)
}

/// Build for a target functional, returning the root certificate when the
/// system needed one.
pub fn build_system(
    spec: &ModelSpec,
    functional: &TargetFunctional,
    opts: &BuildOptions,
) -> Result<(FeqSystem, Option<RootCertificate>)> {
    let alpha = functional.alpha();
    if let TargetFunctional::RuinTimeLst { .. } = functional {
        if !spec.supports_time() {
            return Err(Error::UnsupportedFunctional(format!("ruin-time transform for {}", spec.kind())));
        }
        if !(alpha.re >= 0.0) {
            return Err(invalid(format!("alpha={alpha} needs Re >= 0")));
        }
    }
    let a = assemble(spec, alpha, opts)?;
    Ok((a.system, a.certificate))
}
