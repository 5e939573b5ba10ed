//! Generic assembly of a functional equation from a pair layout.
//!
//! For an up branch with factor `g` and a kernel term `c y^k e^{-r y}`, the
//! transform of `int R(g v + y) g(y) dy` in `v` at `sigma` is
//! `c k! g^k (r g - sigma)^{-(k+1)} rho(sigma / g)` minus the boundary terms
//! `c (k!/l!) g^{k-l} (-1)^l (r g - sigma)^{-(k-l+1)} rho^{(l)}(r)`. Down
//! branches contribute `ghat(sigma/g)/g rho(sigma/g)` plus the transform of
//! the overshoot tail. Branches with factor one leave `rho(s)` on the right;
//! it is moved to the left and divided out, and the unknowns it brings are
//! fixed at the right-half-plane zeros of the divisor.

use super::layout::{layout, Branch, Layout, Pair};
use super::{BuildOptions, ModelSpec};
use crate::error::{Error, Result};
use crate::feq::{AffineMap, EvalFn, FeqSystem, NodeEval, RootEquations, UnknownDescriptor, UnknownSource};
use crate::numerics::{factorial, Jet, Poly, RatSum};
use crate::roots::{rhp_roots, RootCertificate};
use num_complex::Complex64;
use std::sync::Arc;

const SAME: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME * (1.0 + a.abs().max(b.abs()))
}

pub struct Assembly {
    pub system: FeqSystem,
    pub certificate: Option<RootCertificate>,
}

struct Core {
    kappa: f64,
    c: f64,
    alpha: Complex64,
    survival: crate::distributions::Weight,
    pairs: Vec<Pair>,
    /// Map index per pair; `None` for the identity branch.
    pair_map: Vec<Option<usize>>,
    n_maps: usize,
    /// `(rate, derivative order)` per unknown.
    unknowns: Vec<(f64, usize)>,
    has_identity: bool,
}

struct Raw {
    coeffs: Vec<Jet>,
    ident: Jet,
    h0: Jet,
    hk: Vec<Jet>,
}

impl Core {
    fn unknown_index(&self, rate: f64, l: usize) -> usize {
        self.unknowns.iter().position(|(r, o)| *o == l && close(*r, rate)).expect("unknown registered")
    }

    fn raw(&self, s: &Jet) -> Raw {
        let inv = 1.0 / self.kappa;
        let zero = s.lift(Complex64::new(0.0, 0.0));
        let sw = s.add_scalar(self.alpha).scale_re(inv);
        let sp = s.add_scalar(self.alpha * self.c).scale_re(inv);
        let mut coeffs = vec![zero; self.n_maps];
        let mut ident = zero;
        let mut h0 = self.survival.lt_jet(&sw);
        let mut hk = vec![zero; self.unknowns.len()];
        for (p, map) in self.pairs.iter().zip(&self.pair_map) {
            let w = p.weight.lt_jet(&sw);
            let coef = match p.branch {
                Branch::Up(g) => {
                    let mut cg = zero;
                    for t in &p.kernel.0 {
                        let k = t.power as usize;
                        let d = sp.scale_re(-1.0).add_scalar(Complex64::new(t.rate * g, 0.0));
                        cg += d.powi(-(k as i32 + 1)).scale_re(t.coef * factorial(k) * g.powi(k as i32));
                        for l in 0..=k {
                            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                            let u = d
                                .powi(-((k - l) as i32 + 1))
                                .scale_re(t.coef * factorial(k) / factorial(l) * g.powi((k - l) as i32) * sign);
                            let i = self.unknown_index(t.rate, l);
                            hk[i] -= w * u;
                        }
                    }
                    w * cg
                }
                Branch::Down(g) => {
                    let x = sp.scale_re(1.0 / g);
                    let cd = p.kernel.lt_jet(&x).scale_re(1.0 / g);
                    let mut kd = zero;
                    for t in &p.kernel.0 {
                        let k = t.power as usize;
                        for j in 0..=k {
                            let r = t.rate;
                            kd += x
                                .add_scalar(Complex64::new(r, 0.0))
                                .powi(-(j as i32 + 1))
                                .scale_re(t.coef * factorial(k) * r.powi(j as i32 - k as i32 - 1));
                        }
                    }
                    h0 += w * kd.scale_re(1.0 / g);
                    w * cd
                }
            };
            match map {
                Some(i) => coeffs[*i] += coef,
                None => ident += coef,
            }
        }
        Raw {
            coeffs: coeffs.into_iter().map(|c| c.scale_re(inv)).collect(),
            ident: ident.scale_re(inv),
            h0: h0.scale_re(inv),
            hk: hk.into_iter().map(|h| h.scale_re(inv)).collect(),
        }
    }

    fn eval(&self, s: &Jet) -> Result<NodeEval> {
        let r = self.raw(s);
        if !self.has_identity {
            return Ok(NodeEval { coeffs: r.coeffs, h0: r.h0, hk: r.hk });
        }
        let d = (-r.ident).add_scalar(Complex64::new(1.0, 0.0));
        if d.value().norm() < 1e-14 {
            return Err(Error::PoleProximity(s.value()));
        }
        let div = |j: Jet| j / d;
        Ok(NodeEval { coeffs: r.coeffs.into_iter().map(div).collect(), h0: div(r.h0), hk: r.hk.into_iter().map(div).collect() })
    }

    /// `1 - (identity coefficient)` as a rational function of `s`.
    fn divisor(&self) -> Result<RatSum> {
        let inv = 1.0 / self.kappa;
        let mut total = RatSum::constant(Complex64::new(1.0, 0.0));
        for (p, map) in self.pairs.iter().zip(&self.pair_map) {
            if map.is_some() {
                continue;
            }
            let w = p.weight.lt_ratsum(inv, self.alpha * inv).ok_or_else(|| {
                Error::UnsupportedCombination("root equations need a phase-type interarrival law".into())
            })?;
            let k = match p.branch {
                Branch::Up(g) => {
                    let mut acc = RatSum::default();
                    for t in &p.kernel.0 {
                        let e = t.power + 1;
                        let z = Complex64::new(self.kappa * t.rate * g, 0.0) - self.alpha * self.c;
                        let coef = t.coef * factorial(t.power as usize) * g.powi(t.power as i32) * (-self.kappa).powi(e as i32);
                        acc = acc.add(RatSum::pole(Complex64::new(coef, 0.0), z, e));
                    }
                    acc
                }
                Branch::Down(g) => p.kernel.lt_ratsum(inv / g, self.alpha * self.c * inv / g).scale(Complex64::new(1.0 / g, 0.0)),
            };
            total = total.add(w.mul(&k).scale(Complex64::new(-inv, 0.0)));
        }
        Ok(total)
    }
}

fn label(alpha: Complex64, rate: f64, l: usize) -> String {
    let f = if alpha.norm() == 0.0 { "rho" } else { "tau" };
    match l {
        0 => format!("{f}({rate})"),
        _ => format!("{f}^({l})({rate})"),
    }
}

fn build_core(lay: Layout, alpha: Complex64) -> Result<(Core, Vec<f64>)> {
    let Layout { pairs, survival, kappa, c } = lay;
    let mut factors: Vec<f64> = Vec::new();
    let mut pair_map = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let g = match p.branch {
            Branch::Up(g) | Branch::Down(g) => g,
        };
        let eff = kappa * g;
        if close(eff, 1.0) {
            if (alpha * c).norm() != 0.0 {
                return Err(Error::ConvergenceGuard(format!("factor {g} with delay c={c} gives a non-contracting map")));
            }
            pair_map.push(None);
            continue;
        }
        if eff < 1.0 {
            return Err(Error::ConvergenceGuard(format!("effective growth factor {eff} < 1 does not contract")));
        }
        let i = match factors.iter().position(|f| close(*f, g)) {
            Some(i) => i,
            None => {
                factors.push(g);
                factors.len() - 1
            }
        };
        pair_map.push(Some(i));
    }

    // unknowns from up-branch boundary terms
    let mut unknowns: Vec<(f64, usize, bool)> = Vec::new();
    for (p, map) in pairs.iter().zip(&pair_map) {
        if let Branch::Up(_) = p.branch {
            for t in &p.kernel.0 {
                for l in 0..=t.power as usize {
                    let identity = map.is_none();
                    match unknowns.iter().find(|(r, _, _)| close(*r, t.rate)) {
                        Some((_, _, id)) if *id != identity => {
                            return Err(Error::UnsupportedCombination(format!(
                                "rate {} is shared by proportional and additive branches",
                                t.rate
                            )));
                        }
                        _ => {}
                    }
                    if !unknowns.iter().any(|(r, o, _)| *o == l && close(*r, t.rate)) {
                        unknowns.push((t.rate, l, identity));
                    }
                }
            }
        }
    }
    unknowns.sort_by(|a, b| (a.2, a.0, a.1).partial_cmp(&(b.2, b.0, b.1)).expect("finite rates"));
    let has_identity = pair_map.iter().any(|m| m.is_none());
    let core = Core {
        kappa,
        c,
        alpha,
        survival,
        pairs,
        pair_map,
        n_maps: factors.len(),
        unknowns: unknowns.iter().map(|(r, l, _)| (*r, *l)).collect(),
        has_identity,
    };
    Ok((core, factors))
}

/// Translate a model (ruin probability for `alpha = 0`, ruin-time transform
/// otherwise) into a functional equation ready for the engine.
pub fn assemble(spec: &ModelSpec, alpha: Complex64, opts: &BuildOptions) -> Result<Assembly> {
    let lay = layout(spec, opts)?;
    let (kappa, c) = (lay.kappa, lay.c);
    let (core, factors) = build_core(lay, alpha)?;
    if core.has_identity && factors.is_empty() && alpha.norm() == 0.0 {
        return Err(Error::UnsupportedCombination(
            "purely additive gains: the ruin equation degenerates at s = 0".into(),
        ));
    }

    let maps: Vec<AffineMap> = factors
        .iter()
        .map(|g| AffineMap { scale: 1.0 / (kappa * g), shift: alpha * c / (kappa * g) })
        .collect();

    let mut poles: Vec<Complex64> = Vec::new();
    for p in &core.pairs {
        if let Branch::Up(g) = p.branch {
            for t in &p.kernel.0 {
                let z = Complex64::new(kappa * t.rate * g, 0.0) - alpha * c;
                if !poles.iter().any(|q| (q - z).norm() <= SAME * (1.0 + z.norm())) {
                    poles.push(z);
                }
            }
        }
    }

    let identity_rates: Vec<bool> = core
        .unknowns
        .iter()
        .map(|(r, _)| {
            core.pairs.iter().zip(&core.pair_map).any(|(p, m)| {
                m.is_none() && matches!(p.branch, Branch::Up(_)) && p.kernel.0.iter().any(|t| close(t.rate, *r))
            })
        })
        .collect();
    let unknowns: Vec<UnknownDescriptor> = core
        .unknowns
        .iter()
        .zip(&identity_rates)
        .map(|((r, l), id)| UnknownDescriptor {
            point: Complex64::new(*r, 0.0),
            derivative_order: *l,
            label: label(alpha, *r, *l),
            source: if *id { UnknownSource::Root } else { UnknownSource::Point },
        })
        .collect();
    let n_root = identity_rates.iter().filter(|x| **x).count();

    let mut certificate = None;
    if core.has_identity {
        let (num, den_poles) = core.divisor()?.clear();
        let den = den_poles.iter().fold(Poly::constant(Complex64::new(1.0, 0.0)), |acc, (z, m)| acc.mul(&Poly::linear_power(*z, *m)));
        let cert = rhp_roots(&num, &den)?;
        if cert.roots.len() != n_root {
            return Err(Error::CountMismatch { expected: n_root, found: cert.roots.len() });
        }
        poles.extend(cert.roots.iter().copied());
        certificate = Some(cert);
    }

    let core = Arc::new(core);
    let c1 = core.clone();
    let eval: EvalFn = Arc::new(move |s: &Jet| c1.eval(s));
    let extra = certificate.as_ref().map(|cert| {
        let c2 = core.clone();
        let raw: EvalFn = Arc::new(move |s: &Jet| {
            let r = c2.raw(s);
            Ok(NodeEval { coeffs: r.coeffs, h0: r.h0, hk: r.hk })
        });
        RootEquations { roots: cert.roots.clone(), raw }
    });
    let system = FeqSystem { label: spec.kind().into(), maps, eval, unknowns, extra, poles };
    Ok(Assembly { system, certificate })
}
