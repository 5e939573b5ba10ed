//! FGM and generalised FGM dependence between interarrival time and gain.
//!
//! With `C(u, v) = uv + theta p(u) g(v)` the joint density of `(B, C)` is
//! `f_B f_C + theta [p'(F_B) f_B] [g'(F_C) f_C]`, a sum of two separable
//! products. For phase-type marginals both tilted factors are exponential
//! polynomials, obtained by expanding `p'` in powers of the survival function.

use crate::distributions::{ExpPoly, InterarrivalSpec, PhaseDist};
use crate::error::{Error, Result};
use crate::numerics::{Jet, binomial};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

/// Trials allowed per rejection draw.
pub const REJECTION_BUDGET: usize = 1_000_000;
const GRID: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaSpec {
    Independent,
    Fgm { theta: f64 },
    Gfgm { theta: f64, k: u32, b: u32, c: u32, d: u32 },
}

/// `u^k (1-u)^b` and its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaPoly {
    pub k: u32,
    pub b: u32,
}

impl BetaPoly {
    pub fn eval(&self, u: f64) -> f64 {
        u.powi(self.k as i32) * (1.0 - u).powi(self.b as i32)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        let (k, b) = (self.k as i32, self.b as i32);
        k as f64 * u.powi(k - 1) * (1.0 - u).powi(b) - b as f64 * u.powi(k) * (1.0 - u).powi(b - 1)
    }

    /// Coefficients `a_j` with `p'(1 - S) = sum_j a_j S^j`.
    pub fn deriv_in_survival(&self) -> Vec<f64> {
        // p = (1-S)^k S^b, p'(u) = k (1-S)^(k-1) S^b - b (1-S)^k S^(b-1)
        let (k, b) = (self.k as usize, self.b as usize);
        let mut out = vec![0.0; k + b];
        for i in 0..k {
            let c = k as f64 * binomial(k - 1, i) * if i % 2 == 0 { 1.0 } else { -1.0 };
            out[b + i] += c;
        }
        for i in 0..=k {
            let c = -(b as f64) * binomial(k, i) * if i % 2 == 0 { 1.0 } else { -1.0 };
            out[b - 1 + i] += c;
        }
        out
    }

    /// Bound on `|p'|`: both terms of the derivative are nonnegative and at
    /// most `k` and `b`.
    fn deriv_bound(&self) -> f64 {
        self.k.max(self.b) as f64
    }
}

impl CopulaSpec {
    pub fn theta(&self) -> f64 {
        match *self {
            CopulaSpec::Independent => 0.0,
            CopulaSpec::Fgm { theta } | CopulaSpec::Gfgm { theta, .. } => theta,
        }
    }

    /// `(p, g)` perturbation factors; FGM is the case `k = b = c = d = 1`.
    pub fn factors(&self) -> Option<(BetaPoly, BetaPoly)> {
        match *self {
            CopulaSpec::Independent => None,
            CopulaSpec::Fgm { .. } => Some((BetaPoly { k: 1, b: 1 }, BetaPoly { k: 1, b: 1 })),
            CopulaSpec::Gfgm { k, b, c, d, .. } => Some((BetaPoly { k, b }, BetaPoly { k: c, b: d })),
        }
    }

    /// Parameter check: `|theta| < 1` for FGM, nonnegative density on a grid
    /// for the generalised family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaSpec::Independent => Ok(()),
            CopulaSpec::Fgm { theta } => {
                if theta.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("FGM theta {theta} outside (-1, 1)")))
                }
            }
            CopulaSpec::Gfgm { theta, k, b, c, d } => {
                if k == 0 || b == 0 || c == 0 || d == 0 || !theta.is_finite() {
                    return Err(Error::InvalidParameter("GFGM exponents must be at least 1".into()));
                }
                let (p, g) = self.factors().unwrap();
                let mut min = f64::INFINITY;
                for i in 0..GRID {
                    let pu = p.deriv(i as f64 / (GRID - 1) as f64);
                    for j in 0..GRID {
                        min = min.min(1.0 + theta * pu * g.deriv(j as f64 / (GRID - 1) as f64));
                    }
                }
                if min < 0.0 {
                    Err(Error::InvalidParameter(format!("GFGM density negative (min {min:.4}) for theta {theta}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("({u}, {v}) outside the unit square")));
        }
        Ok(match self.factors() {
            None => 1.0,
            Some((p, g)) => 1.0 + self.theta() * p.deriv(u) * g.deriv(v),
        })
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        match self.factors() {
            None => u * v,
            Some((p, g)) => u * v + self.theta() * p.eval(u) * g.eval(v),
        }
    }

    /// Separable decomposition of the joint density of `(B, C)` as
    /// `(weight on B, kernel on C)` pairs; vanishing tilts are dropped.
    pub fn pairs(&self, b: &PhaseDist, c: &PhaseDist) -> Vec<(ExpPoly, ExpPoly)> {
        let mut out = vec![(b.pdf_exppoly(), c.pdf_exppoly())];
        if let Some((p, g)) = self.factors() {
            let theta = self.theta();
            if theta != 0.0 {
                let w = tilt(b, &p).scale(theta);
                let k = tilt(c, &g);
                if !w.is_empty() && !k.is_empty() {
                    out.push((w, k));
                }
            }
        }
        out
    }
}

/// `p'(F(x)) f(x)` as an exponential polynomial.
pub fn tilt(dist: &PhaseDist, p: &BetaPoly) -> ExpPoly {
    let surv = dist.survival_exppoly();
    let f = dist.pdf_exppoly();
    let mut acc = ExpPoly::default();
    let mut pw = ExpPoly::term(1.0, 0, 0.0);
    for a in p.deriv_in_survival() {
        if a != 0.0 {
            acc = acc.add(&pw.scale(a));
        }
        pw = pw.mul(&surv);
    }
    acc.mul(&f)
}

/// Transform of `h(x) = f_B(x) (1 - 2 F_B(x))`.
pub fn h_star(b: &InterarrivalSpec, s: Complex64, order: usize) -> Result<Jet> {
    let d = b.density()?;
    Ok(tilt(d, &BetaPoly { k: 1, b: 1 }).lt_jet(&Jet::var(s, order)))
}

/// Transform of `g_Z(t) = f_B(t) - f_B(t) p'(F_B(t))` with `p(u) = u^k (1-u)^b`.
pub fn gz_star(b: &InterarrivalSpec, k: u32, bb: u32, s: Complex64, order: usize) -> Result<Jet> {
    let d = b.density()?;
    let x = Jet::var(s, order);
    Ok(d.lst_of(&x) - tilt(d, &BetaPoly { k, b: bb }).lt_jet(&x))
}

/// `k_C(y) = g'(1 - e^(-mu y)) mu e^(-mu y)` for `g(v) = v^c (1-v)^d`, as
/// `(coefficient, rate)` pairs from the binomial expansion of
/// `mu (1 - e^(-mu y))^(c-1) [(c+d) e^(-mu (d+1) y) - d e^(-mu d y)]`.
pub fn kc_rates(mu: f64, c: u32, d: u32) -> Vec<(f64, f64)> {
    let (cf, df) = (c as f64, d as f64);
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut push = |coef: f64, rate: f64| match out.iter_mut().find(|e| (e.1 - rate).abs() < 1e-12 * rate) {
        Some(e) => e.0 += coef,
        None => out.push((coef, rate)),
    };
    for i in 0..c {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let bin = binomial(c as usize - 1, i as usize) * sign * mu;
        let fi = i as f64;
        push(bin * (cf + df), mu * (df + 1.0 + fi));
        push(-bin * df, mu * (df + fi));
    }
    out.retain(|e| e.0 != 0.0);
    out
}

/// Draw `(t, y)` with marginals `B`, `C` joined by the copula.
pub fn sample_pair<R: Rng + ?Sized>(
    spec: &CopulaSpec,
    b: &InterarrivalSpec,
    c: &PhaseDist,
    rng: &mut R,
) -> Result<(f64, f64)> {
    match *spec {
        CopulaSpec::Independent => Ok((b.sample(rng), c.sample(rng))),
        CopulaSpec::Fgm { theta } => {
            // Given U = F_B(B), C has density f (1 + k (1 - 2F)) with
            // k = theta (1 - 2U): the min of two copies w.p. (1+k)/2, else the max.
            let bd = b.density()?;
            let t = bd.sample(rng);
            let k = theta * (1.0 - 2.0 * bd.cdf(t));
            let (y1, y2) = (c.sample(rng), c.sample(rng));
            let y = if rng.random::<f64>() < 0.5 * (1.0 + k) { y1.min(y2) } else { y1.max(y2) };
            Ok((t, y))
        }
        CopulaSpec::Gfgm { theta, .. } => {
            let bd = b.density()?;
            let (p, g) = spec.factors().unwrap();
            let bound = 1.0 + theta.abs() * p.deriv_bound() * g.deriv_bound() * (1.0 + 1e-9);
            for _ in 0..REJECTION_BUDGET {
                let t = bd.sample(rng);
                let y = c.sample(rng);
                let dens = 1.0 + theta * p.deriv(bd.cdf(t)) * g.deriv(c.cdf(y));
                if rng.random::<f64>() * bound < dens {
                    return Ok((t, y));
                }
            }
            Err(Error::RejectionBudget(REJECTION_BUDGET))
        }
    }
}

/// Solve `v + k v (1 - v) = w` for `v` in `[0, 1]`, `k = theta (1 - 2u)`.
pub fn fgm_conditional_inverse(theta: f64, u: f64, w: f64) -> f64 {
    let k = theta * (1.0 - 2.0 * u);
    if k.abs() < 1e-12 {
        return w;
    }
    let disc = ((1.0 + k) * (1.0 + k) - 4.0 * k * w).max(0.0);
    // numerically stable root of k v^2 - (1+k) v + w = 0
    let v = 2.0 * w / ((1.0 + k) + disc.sqrt());
    v.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre_composite;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn fgm_density_examples() {
        let s = CopulaSpec::Fgm { theta: 0.5 };
        assert_eq!(s.density(0.5, 0.5).unwrap(), 1.0);
        assert!((s.density(0.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(s.density(1.2, 0.0).is_err());
        assert_eq!(CopulaSpec::Independent.density(0.3, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn gfgm_density_integrates_to_one() {
        let s = CopulaSpec::Gfgm { theta: 0.3, k: 2, b: 1, c: 2, d: 1 };
        s.validate().unwrap();
        let v = gauss_legendre_composite(
            |u| gauss_legendre_composite(|v| c(s.density(u, v).unwrap()), 0.0, 1.0, 8, 1),
            0.0,
            1.0,
            8,
            1,
        );
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn survival_expansion_of_derivative() {
        for (k, b) in [(1, 1), (2, 1), (1, 3), (3, 2)] {
            let p = BetaPoly { k, b };
            let a = p.deriv_in_survival();
            for u in [0.0, 0.2, 0.7, 1.0] {
                let s: f64 = 1.0 - u;
                let via: f64 = a.iter().enumerate().map(|(j, aj)| aj * s.powi(j as i32)).sum();
                assert!((via - p.deriv(u)).abs() < 1e-13, "k={k} b={b} u={u}");
            }
        }
    }

    #[test]
    fn h_star_examples() {
        let b = InterarrivalSpec::Phase(PhaseDist::exponential(1.0).unwrap());
        assert!(h_star(&b, c(0.0), 0).unwrap().value().norm() < 1e-15);
        let v = h_star(&b, c(1.0), 0).unwrap().value();
        assert!((v - c(1.0 / 6.0)).norm() < 1e-15);
        let er = PhaseDist::erlang(2, 1.0).unwrap();
        let q = gauss_legendre_composite(
            |x| c((-x).exp() * er.pdf(x) * (1.0 - 2.0 * er.cdf(x))),
            0.0,
            60.0,
            20,
            30,
        );
        let v = h_star(&InterarrivalSpec::Phase(er), c(1.0), 0).unwrap().value();
        assert!((v - q).norm() < 1e-10);
    }

    #[test]
    fn gz_star_examples() {
        let b = InterarrivalSpec::Phase(PhaseDist::exponential(1.0).unwrap());
        assert!((gz_star(&b, 2, 3, c(0.0), 0).unwrap().value() - c(1.0)).norm() < 1e-14);
        // k = b = 1: phi - g_Z* = h*
        let s = Complex64::new(0.7, 0.4);
        let phi = b.lst_jet(s, 0).unwrap().value();
        let diff = phi - gz_star(&b, 1, 1, s, 0).unwrap().value();
        assert!((diff - h_star(&b, s, 0).unwrap().value()).norm() < 1e-15);
        let f = |x: f64| (-x).exp() * (1.0 - BetaPoly { k: 1, b: 1 }.deriv(1.0 - (-x).exp()));
        let q = gauss_legendre_composite(|x| c((-x).exp() * f(x)), 0.0, 50.0, 20, 25);
        assert!((gz_star(&b, 1, 1, c(1.0), 0).unwrap().value() - q).norm() < 1e-10);
    }

    #[test]
    fn kc_expansion_matches_direct_formula() {
        for (mu, cc, d) in [(1.0, 2, 1), (1.5, 3, 2), (0.7, 1, 1)] {
            let terms = kc_rates(mu, cc, d);
            let g = BetaPoly { k: cc, b: d };
            for y in [0.1, 1.0, 5.0] {
                let direct = g.deriv(1.0 - (-mu * y).exp()) * mu * (-mu * y).exp();
                let via: f64 = terms.iter().map(|(a, r)| a * (-r * y).exp()).sum();
                assert!((direct - via).abs() < 1e-10);
            }
            let mass: f64 = terms.iter().map(|(a, r)| a / r).sum();
            assert!(mass.abs() < 1e-12);
            // and the generic tilt agrees
            let t = tilt(&PhaseDist::exponential(mu).unwrap(), &g);
            for y in [0.3, 2.0] {
                let via: f64 = terms.iter().map(|(a, r)| a * (-r * y).exp()).sum();
                assert!((t.eval(y) - via).abs() < 1e-12);
            }
        }
        assert_eq!(kc_rates(2.0, 1, 1), vec![(4.0, 4.0), (-2.0, 2.0)]);
        
    }

    #[test]
    fn conditional_inverse_solves_the_quadratic() {
        for theta in [-0.99, -0.5, 0.3, 0.999] {
            for u in [0.0, 0.25, 0.9] {
                for w in [0.0, 0.1, 0.5, 0.99, 1.0] {
                    let v = fgm_conditional_inverse(theta, u, w);
                    let k = theta * (1.0 - 2.0 * u);
                    assert!((v + k * v * (1.0 - v) - w).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gfgm_rejects_negative_density() {
        assert!(CopulaSpec::Gfgm { theta: 20.0, k: 1, b: 1, c: 1, d: 1 }.validate().is_err());
        assert!(CopulaSpec::Fgm { theta: 1.0 }.validate().is_err());
    }
}
