//! Ray marching for systems whose maps are all pure scalings.
//!
//! Along `s = s0 exp(-u)` each map becomes a shift `u -> u + ln(1/scale)`, so
//! the series can be built backwards from a Taylor expansion at the origin
//! using a uniform grid in `u` and local Lagrange interpolation. The cost is
//! linear in the number of maps rather than in the lattice volume.

use super::system::FeqSystem;
use super::{SeriesValue, Strategy};
use crate::error::{Error, Result};
use crate::numerics::{binomial, Jet, MAX_ORDER};
use num_complex::Complex64;

const STENCIL: usize = 12;
const TAYLOR_ORDER: usize = 12;
/// Below this modulus the origin expansion is used directly.
const TAYLOR_RADIUS: f64 = 1e-5;

/// One affine component set: index 0 is the `h0` part, `1 + k` the `u_k` part.
type State = Vec<Vec<Complex64>>;

fn lagrange_weights(f: f64) -> [f64; STENCIL] {
    let nodes: Vec<f64> = (0..STENCIL).map(|t| t as f64 - 5.0).collect();
    let mut w = [0.0; STENCIL];
    for (t, wt) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for (t2, x2) in nodes.iter().enumerate() {
            if t2 != t {
                p *= (f - x2) / (nodes[t] - x2);
            }
        }
        *wt = p;
    }
    w
}

/// Taylor coefficients of every affine component at `s = 0`, solved order by
/// order from the equation (the scaled unknown coefficient sits on the left).
fn origin_expansion(system: &FeqSystem) -> Result<State> {
    let j = TAYLOR_ORDER.min(MAX_ORDER);
    let zero = Complex64::new(0.0, 0.0);
    let e = (system.eval)(&Jet::var(zero, j))?;
    let dims = 1 + e.hk.len();
    let mut c: State = vec![vec![zero; j + 1]; dims];
    for (q, cq) in c.iter_mut().enumerate() {
        let h = if q == 0 { &e.h0 } else { &e.hk[q - 1] };
        for k in 0..=j {
            let mut rhs = h.coeff(k);
            let mut diag = Complex64::new(1.0, 0.0);
            for (l, map) in system.maps.iter().enumerate() {
                let g = map.scale;
                for i in 0..k {
                    rhs += e.coeffs[l].coeff(k - i) * cq[i] * g.powi(i as i32);
                }
                diag -= e.coeffs[l].coeff(0) * g.powi(k as i32);
            }
            if diag.norm() < 1e-12 {
                return Err(Error::Divergence(1.0));
            }
            cq[k] = rhs / diag;
        }
    }
    Ok(c)
}

/// Re-center the origin expansion at `s` and truncate to `order`.
fn recenter(c0: &State, s: Complex64, order: usize) -> State {
    c0.iter()
        .map(|cq| {
            (0..=order)
                .map(|k| {
                    let mut v = Complex64::new(0.0, 0.0);
                    for (jj, cj) in cq.iter().enumerate().skip(k) {
                        v += cj * binomial(jj, k) * s.powi((jj - k) as i32);
                    }
                    v
                })
                .collect()
        })
        .collect()
}

pub(crate) fn ray_series(system: &FeqSystem, s0: Complex64, order: usize, tol: f64) -> Result<SeriesValue> {
    if !system.is_pure_scaling() {
        return Err(Error::UnsupportedCombination("ray strategy needs pure scaling maps".into()));
    }
    let origin = origin_expansion(system)?;
    let dims = origin.len();
    let pack = |st: &State, center: Complex64| -> Result<SeriesValue> {
        let jets: Vec<Jet> = st.iter().map(|c| Jet::from_coeffs(center, c)).collect::<Result<_>>()?;
        let tail = tol;
        Ok(SeriesValue { a: jets[0], b: jets[1..].to_vec(), tail, depth: 0, nodes: 0, strategy: Strategy::Ray })
    };
    if s0.norm() <= TAYLOR_RADIUS {
        return pack(&recenter(&origin, s0, order), s0);
    }

    let shifts: Vec<f64> = system.maps.iter().map(|m| -m.scale.ln()).collect();
    let lmin = shifts.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = shifts.iter().cloned().fold(0.0, f64::max);
    let delta = (lmin / 8.0).min(0.01);
    let m_grid = ((s0.norm() / TAYLOR_RADIUS).ln() / delta).ceil() as usize;
    let ext = (lmax / delta).ceil() as usize + STENCIL + 2;
    let total = m_grid + ext;
    let point = |i: usize| s0 * (-(i as f64) * delta).exp();

    let stencils: Vec<(usize, [f64; STENCIL])> = shifts
        .iter()
        .map(|l| {
            let x = l / delta;
            let n = x.floor();
            (n as usize, lagrange_weights(x - n))
        })
        .collect();

    let mut grid: Vec<Option<State>> = vec![None; total];
    for (i, slot) in grid.iter_mut().enumerate().skip(m_grid) {
        *slot = Some(recenter(&origin, point(i), order));
    }
    for i in (0..m_grid).rev() {
        let s = point(i);
        if system.near_pole(s) {
            return Err(Error::PoleProximity(s));
        }
        let var = Jet::var(s, order);
        let e = (system.eval)(&var)?;
        let mut st: State = Vec::with_capacity(dims);
        for q in 0..dims {
            let h = if q == 0 { e.h0 } else { e.hk[q - 1] };
            st.push(h.coeffs().to_vec());
        }
        for (l, map) in system.maps.iter().enumerate() {
            let (n, w) = &stencils[l];
            let inner = map.apply_jet(&var);
            for (q, sq) in st.iter_mut().enumerate() {
                let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
                for (t, wt) in w.iter().enumerate() {
                    let idx = i + n + t - 5;
                    let src = grid[idx].as_ref().expect("stencil reaches computed points");
                    for (ck, sk) in c.iter_mut().zip(&src[q]) {
                        *ck += sk * *wt;
                    }
                }
                let rho = Jet::from_coeffs(inner.value(), &c)?.compose(&inner);
                let add = e.coeffs[l] * rho;
                for (k, v) in sq.iter_mut().enumerate() {
                    *v += add.coeff(k);
                }
            }
        }
        if st.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Divergence(1.0));
        }
        grid[i] = Some(st);
    }
    pack(grid[0].as_ref().expect("grid start"), s0)
}
