//! Collocation for the unknowns and evaluation of the resolved transform.

use super::system::{FeqSystem, UnknownSource};
use super::{series_eval_robust, SeriesOptions, Strategy};
use crate::error::{Error, Result};
use crate::numerics::{factorial, solve_linear, Jet, LinearSystem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// A system with its unknowns fixed. Immutable once built, so it may be
/// evaluated from several threads.
#[derive(Clone, Debug)]
pub struct TransformSolution {
    pub system: FeqSystem,
    pub resolved_unknowns: Vec<Complex64>,
    pub tail_bound: f64,
    /// Max-norm residual of the collocation system.
    pub residual: f64,
    pub options: SeriesOptions,
    combined: FeqSystem,
}

impl TransformSolution {
    /// The equation with the unknowns substituted into its constant term.
    pub fn combined(&self) -> &FeqSystem {
        &self.combined
    }
}

pub fn solve_unknowns(system: &FeqSystem) -> Result<TransformSolution> {
    solve_unknowns_with(system, &SeriesOptions::default())
}

pub fn solve_unknowns_with(system: &FeqSystem, opts: &SeriesOptions) -> Result<TransformSolution> {
    let n = system.n_unknowns();
    let roots: &[Complex64] = system.extra.as_ref().map(|e| e.roots.as_slice()).unwrap_or(&[]);
    let n_root_unknowns = system.unknowns.iter().filter(|u| u.source == UnknownSource::Root).count();
    if roots.len() != n_root_unknowns {
        return Err(Error::CountMismatch { expected: n_root_unknowns, found: roots.len() });
    }
    system.contraction()?;
    // Once the lattice overflows for this system it will keep doing so.
    let mut opts = *opts;

    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    let mut tail: f64 = 0.0;
    let mut row = 0;

    // Point rows, one series evaluation per distinct point.
    let mut points: Vec<(Complex64, usize)> = Vec::new();
    for u in system.unknowns.iter().filter(|u| u.source == UnknownSource::Point) {
        match points.iter_mut().find(|(p, _)| (*p - u.point).norm() <= 1e-12 * (1.0 + p.norm())) {
            Some(entry) => entry.1 = entry.1.max(u.derivative_order),
            None => points.push((u.point, u.derivative_order)),
        }
    }
    let mut evals = Vec::with_capacity(points.len());
    for (p, order) in &points {
        let v = series_eval_robust(system, *p, *order, &opts)?;
        opts.force_ray |= v.strategy == Strategy::Ray;
        tail = tail.max(v.tail);
        evals.push((*p, v));
    }
    for (i, u) in system.unknowns.iter().enumerate() {
        if u.source != UnknownSource::Point {
            continue;
        }
        let (_, v) = evals
            .iter()
            .find(|(p, _)| (*p - u.point).norm() <= 1e-12 * (1.0 + p.norm()))
            .expect("point evaluated");
        let l = u.derivative_order;
        let f = factorial(l);
        mat[(row, i)] += Complex64::new(1.0, 0.0);
        for (k, bk) in v.b.iter().enumerate() {
            mat[(row, k)] -= bk.coeff(l) * f;
        }
        rhs[row] = v.a.coeff(l) * f;
        row += 1;
    }

    // Root rows from the undivided equation.
    if let Some(extra) = &system.extra {
        for &z in &extra.roots {
            let raw = (extra.raw)(&Jet::var(z, 0))?;
            let mut r = raw.hk.iter().map(|h| h.value()).collect::<Vec<_>>();
            r.resize(n, Complex64::new(0.0, 0.0));
            let mut c = raw.h0.value();
            for (l, map) in system.maps.iter().enumerate() {
                let coef = raw.coeffs[l].value();
                if coef.norm() == 0.0 {
                    continue;
                }
                let v = series_eval_robust(system, map.apply(z), 0, &opts)?;
                opts.force_ray |= v.strategy == Strategy::Ray;
                tail = tail.max(v.tail);
                c += coef * v.a.value();
                for (rk, bk) in r.iter_mut().zip(&v.b) {
                    *rk += coef * bk.value();
                }
            }
            for (k, rk) in r.into_iter().enumerate() {
                mat[(row, k)] = rk;
            }
            rhs[row] = -c;
            row += 1;
        }
    }
    debug_assert_eq!(row, n);
    if n == 0 && system.is_pure_scaling() {
        let v = series_eval_robust(system, Complex64::new(1.0, 0.0), 0, &opts)?;
        opts.force_ray |= v.strategy == Strategy::Ray;
        tail = tail.max(v.tail);
    }

    let (u, residual) = if n == 0 {
        (Vec::new(), 0.0)
    } else {
        let sol = solve_linear(&LinearSystem::new(mat, rhs)?)?;
        (sol.x.iter().copied().collect(), sol.residual)
    };
    log::debug!("{}: unknowns {:?}, residual {residual:.2e}", system.label, u);
    let combined = system.with_unknowns(&u);
    Ok(TransformSolution {
        system: system.clone(),
        resolved_unknowns: u,
        tail_bound: tail,
        residual,
        options: opts,
        combined,
    })
}

pub fn rho_eval(sol: &TransformSolution, s: Complex64) -> Result<Complex64> {
    Ok(rho_jet(sol, s, 0)?.value())
}

/// Taylor jet of the resolved transform at `s`.
pub fn rho_jet(sol: &TransformSolution, s: Complex64, order: usize) -> Result<Jet> {
    Ok(series_eval_robust(&sol.combined, s, order, &sol.options)?.a)
}

/// `rho(s) - sum_l c_l(s) rho(m_l(s)) - h0(s) - sum_k h_k(s) u_k` for the
/// resolved transform, evaluating every `rho` through the series.
pub fn equation_residual(sol: &TransformSolution, s: Complex64) -> Result<Complex64> {
    let sys = &sol.system;
    let e = (sys.eval)(&Jet::var(s, 0))?;
    let mut r = rho_eval(sol, s)? - e.h0.value();
    for (h, u) in e.hk.iter().zip(&sol.resolved_unknowns) {
        r -= h.value() * u;
    }
    for (c, map) in e.coeffs.iter().zip(&sys.maps) {
        if c.value().norm() != 0.0 {
            r -= c.value() * rho_eval(sol, map.apply(s))?;
        }
    }
    Ok(r)
}
