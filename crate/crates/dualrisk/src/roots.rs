//! Right-half-plane roots of the cleared characteristic equations, certified
//! by an independent winding-number count.

use crate::error::{Error, Result};
use crate::numerics::Poly;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Roots with `Re <= RHP_EPS` are treated as not in the open right half-plane.
pub const RHP_EPS: f64 = 1e-9;
const MIN_SAMPLES: usize = 4096;
const MAX_SAMPLES: usize = 1 << 20;
const MAX_DOUBLINGS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootCertificate {
    #[serde(serialize_with = "ser_roots")]
    pub roots: Vec<Complex64>,
    pub expected_count: usize,
    pub winding_number: i64,
    pub residuals: Vec<f64>,
}

fn ser_roots<S: serde::Serializer>(roots: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(roots.len()))?;
    for z in roots {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Boundary of the right half-disc of radius `r`, counter-clockwise: the arc
/// from `-ir` through `r` to `ir`, then down the imaginary axis.
fn contour(r: f64, t: f64) -> Complex64 {
    if t < 0.5 {
        Complex64::from_polar(r, -FRAC_PI_2 + 2.0 * t * PI)
    } else {
        Complex64::new(0.0, r * (1.0 - 4.0 * (t - 0.5)))
    }
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

/// Accumulated argument change of `f` along `[t0, t1]`, subdividing wherever
/// one step turns by more than a quarter.
fn arg_change<F: Fn(Complex64) -> Complex64>(f: &F, r: f64, t0: f64, t1: f64, f0: Complex64, f1: Complex64, depth: u32) -> Result<f64> {
    let d = phase_step(f0, f1);
    if d.abs() <= FRAC_PI_2 || depth == 0 {
        return Ok(d);
    }
    let tm = 0.5 * (t0 + t1);
    let zm = contour(r, tm);
    let fm = f(zm);
    if fm.norm() < 1e-10 {
        return Err(Error::OnContourZero(zm));
    }
    Ok(arg_change(f, r, t0, tm, f0, fm, depth - 1)? + arg_change(f, r, tm, t1, fm, f1, depth - 1)?)
}

/// Winding number of `f` around the right half-disc of fixed radius.
pub fn winding_number<F: Fn(Complex64) -> Complex64>(f: &F, radius: f64, samples: usize) -> Result<i64> {
    let n = samples.max(8);
    let mut total = 0.0;
    let z0 = contour(radius, 0.0);
    let mut prev = f(z0);
    if prev.norm() < 1e-10 {
        return Err(Error::OnContourZero(z0));
    }
    for i in 1..=n {
        let t = i as f64 / n as f64;
        let z = contour(radius, t);
        let v = f(z);
        if v.norm() < 1e-10 {
            return Err(Error::OnContourZero(z));
        }
        total += arg_change(f, radius, (i - 1) as f64 / n as f64, t, prev, v, 30)?;
        prev = v;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Number of zeros minus poles of `f` in the right half-plane. The radius is
/// doubled until the count repeats on two further doublings and the sample
/// count until two refinements agree.
pub fn count_rhp_zeros<F: Fn(Complex64) -> Complex64>(f: F, radius: f64, samples: usize) -> Result<i64> {
    let at_radius = |r: f64| -> Result<i64> {
        let mut n = samples.max(MIN_SAMPLES);
        let mut last = winding_number(&f, r, n)?;
        loop {
            n *= 2;
            let w = winding_number(&f, r, n)?;
            if w == last {
                return Ok(w);
            }
            if n >= MAX_SAMPLES {
                return Err(Error::NonConvergedRadius);
            }
            last = w;
        }
    };
    let mut r = radius;
    let mut history = vec![at_radius(r)?];
    for _ in 0..MAX_DOUBLINGS {
        r *= 2.0;
        history.push(at_radius(r)?);
        let k = history.len();
        if k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3] {
            return Ok(history[k - 1]);
        }
    }
    Err(Error::NonConvergedRadius)
}

/// Cauchy bound on the moduli of the roots.
fn cauchy_radius(p: &Poly) -> f64 {
    let lead = p.0.last().map(|c| c.norm()).unwrap_or(1.0);
    1.0 + p.0[..p.0.len() - 1].iter().map(|c| c.norm() / lead).fold(0.0, f64::max)
}

fn polish(p: &Poly, dp: &Poly, mut z: Complex64) -> Complex64 {
    let mut best = p.eval(z).norm();
    for _ in 0..60 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - p.eval(z) / d;
        let v = p.eval(next).norm();
        if !(v < best) || next.re <= RHP_EPS {
            break;
        }
        best = v;
        z = next;
    }
    z
}

/// Zeros with positive real part of `num / den`, found from the companion
/// matrix of `num`, Newton-polished and cross-checked by winding number.
pub fn rhp_roots(num: &Poly, den: &Poly) -> Result<RootCertificate> {
    let p = num.clone().trim(1e-14);
    let dp = p.derivative();
    let mut roots: Vec<Complex64> = p
        .roots()
        .into_iter()
        .filter(|z| z.re > RHP_EPS)
        .map(|z| polish(&p, &dp, z))
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let winding = if p.degree() == 0 { 0 } else { count_rhp_zeros(|s| p.eval(s), cauchy_radius(&p), MIN_SAMPLES)? };
    if winding != roots.len() as i64 {
        return Err(Error::CountMismatch { expected: winding.max(0) as usize, found: roots.len() });
    }
    let residuals = roots.iter().map(|z| (p.eval(*z) / den.eval(*z)).norm()).collect();
    Ok(RootCertificate { expected_count: roots.len(), winding_number: winding, roots, residuals })
}
