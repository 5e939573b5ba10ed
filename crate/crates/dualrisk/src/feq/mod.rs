//! Generic solver for the functional equations behind every model.
//!
//! A system is `rho(s) = sum_l c_l(s) rho(m_l(s)) + h0(s) + sum_k h_k(s) u_k`
//! with contracting affine maps `m_l`. Iterating it expresses `rho(s)` as a
//! lattice sum that is affine in the unknowns `u_k`; those are then fixed by
//! collocation at their defining points and, where needed, at roots.

mod lattice;
mod ray;
mod solve;
mod system;

pub use lattice::lattice_coefficients;
pub use solve::{equation_residual, rho_eval, rho_jet, solve_unknowns, solve_unknowns_with, TransformSolution};
pub use system::{AffineMap, EvalFn, FeqSystem, JetFn, NodeEval, RootEquations, UnknownDescriptor, UnknownSource};

use crate::error::{Error, Result};
use crate::numerics::Jet;
use num_complex::Complex64;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_NODES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Lattice,
    Ray,
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub tol: f64,
    pub max_nodes: usize,
    /// Skip the lattice and march along the ray (pure scalings only).
    pub force_ray: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: DEFAULT_TOL, max_nodes: DEFAULT_MAX_NODES, force_ray: false }
    }
}

/// `rho(s) = a + sum_k b[k] u_k`, as jets at `s`.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub a: Jet,
    pub b: Vec<Jet>,
    pub tail: f64,
    pub depth: usize,
    pub nodes: usize,
    pub strategy: Strategy,
}

impl SeriesValue {
    pub fn combine(&self, u: &[Complex64]) -> Jet {
        let mut out = self.a;
        for (bk, uk) in self.b.iter().zip(u) {
            out += bk.scale(*uk);
        }
        out
    }
}

pub fn series_eval(system: &FeqSystem, s: Complex64, order: usize, tol: f64) -> Result<SeriesValue> {
    series_eval_with(system, s, order, &SeriesOptions { tol, ..Default::default() })
}

pub fn series_eval_with(system: &FeqSystem, s: Complex64, order: usize, opts: &SeriesOptions) -> Result<SeriesValue> {
    let kappa = system.contraction()?;
    if opts.force_ray {
        return ray::ray_series(system, s, order, opts.tol);
    }
    let prm = lattice::LatticeParams { tol: opts.tol, kappa, max_nodes: opts.max_nodes };
    match lattice::lattice_series(system, s, order, &prm) {
        Err(Error::NodeCap(n)) if system.is_pure_scaling() => {
            log::debug!("{}: lattice passed {n} nodes at s={s}, marching along the ray", system.label);
            ray::ray_series(system, s, order, opts.tol)
        }
        other => other,
    }
}

/// Symmetric rotations `s e^{+-i eps}` averaged and Richardson-combined; used
/// when `s` or one of its images sits on a (removable) coefficient pole.
pub(crate) fn perturbed<F>(s: Complex64, mut f: F) -> Result<Vec<Jet>>
where
    F: FnMut(Complex64) -> Result<Vec<Jet>>,
{
    const EPS: f64 = 1e-3;
    let mut avg = [Vec::new(), Vec::new()];
    for (slot, eps) in avg.iter_mut().zip([EPS, 2.0 * EPS]) {
        let plus = f(s * Complex64::from_polar(1.0, eps))?;
        let minus = f(s * Complex64::from_polar(1.0, -eps))?;
        *slot = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| p.coeffs().iter().zip(m.coeffs()).map(|(x, y)| (x + y) * 0.5).collect::<Vec<_>>())
            .collect::<Vec<_>>();
    }
    avg[0]
        .iter()
        .zip(&avg[1])
        .map(|(a, b)| {
            let c: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (x * 4.0 - y) / 3.0).collect();
            Jet::from_coeffs(s, &c)
        })
        .collect()
}

/// `series_eval` that retries with rotation when a pole is hit.
pub fn series_eval_robust(system: &FeqSystem, s: Complex64, order: usize, opts: &SeriesOptions) -> Result<SeriesValue> {
    match series_eval_with(system, s, order, opts) {
        Err(Error::PoleProximity(p)) => {
            log::debug!("{}: pole near {p}, rotating s={s}", system.label);
            let mut meta = None;
            let jets = perturbed(s, |z| {
                let v = series_eval_with(system, z, order, opts)?;
                let mut out = vec![v.a];
                out.extend(v.b.iter().copied());
                meta = Some((v.tail, v.depth, v.nodes, v.strategy));
                Ok(out)
            });
            let jets = jets?;
            let (tail, depth, nodes, strategy) = meta.expect("evaluated");
            Ok(SeriesValue { a: jets[0], b: jets[1..].to_vec(), tail, depth, nodes, strategy })
        }
        other => other,
    }
}
