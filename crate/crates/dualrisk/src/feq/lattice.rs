//! Multi-index coefficient lattice and the truncated series built on it.

use super::system::FeqSystem;
use super::{SeriesValue, Strategy};
use crate::error::{Error, Result};
use crate::numerics::Jet;
use num_complex::Complex64;
use std::collections::BTreeMap;

type Index = Vec<u32>;

fn child(idx: &Index, l: usize) -> Index {
    let mut c = idx.clone();
    c[l] += 1;
    c
}

fn same_point(a: &Jet, b: &Jet) -> Result<()> {
    let gap = (a.value() - b.value()).norm();
    if gap > 1e-10 * (1.0 + a.value().norm()) {
        return Err(Error::NonCommutingMaps(gap));
    }
    Ok(())
}

/// Every lattice coefficient `G_i(s)` with `|i| <= max_total`.
///
/// A child accumulates `G(parent) * c_l(P(parent))` from each predecessor,
/// where `P` is the composite point reached by the parent's map word.
pub fn lattice_coefficients(
    system: &FeqSystem,
    s: Complex64,
    max_total: usize,
    order: usize,
) -> Result<BTreeMap<Index, Jet>> {
    let m = system.maps.len();
    let root = Jet::var(s, order);
    let mut out = BTreeMap::new();
    let mut level: BTreeMap<Index, (Jet, Jet)> = BTreeMap::new();
    level.insert(vec![0; m], (root.lift(Complex64::new(1.0, 0.0)), root));
    for depth in 0..=max_total {
        let mut next: BTreeMap<Index, (Jet, Jet)> = BTreeMap::new();
        for (idx, (g, p)) in &level {
            out.insert(idx.clone(), *g);
            if depth == max_total {
                continue;
            }
            let e = (system.eval)(p)?;
            for (l, map) in system.maps.iter().enumerate() {
                let contrib = *g * e.coeffs[l];
                let q = map.apply_jet(p);
                match next.entry(child(idx, l)) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert((contrib, q));
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        same_point(&o.get().1, &q)?;
                        o.get_mut().0 += contrib;
                    }
                }
            }
        }
        level = next;
    }
    Ok(out)
}

pub(crate) struct LatticeParams {
    pub tol: f64,
    pub kappa: f64,
    pub max_nodes: usize,
}

/// `rho(s) = sum_i G_i(s) [h0 + sum_k u_k h_k](P_i(s))`, truncated once three
/// consecutive levels fall under the tail budget.
pub(crate) fn lattice_series(
    system: &FeqSystem,
    s: Complex64,
    order: usize,
    prm: &LatticeParams,
) -> Result<SeriesValue> {
    let m = system.maps.len();
    let root = Jet::var(s, order);
    let zero = root.lift(Complex64::new(0.0, 0.0));
    let mut a = zero;
    let mut b: Vec<Jet> = Vec::new();
    let mut level: BTreeMap<Index, (Jet, Jet)> = BTreeMap::new();
    level.insert(vec![0; m], (root.lift(Complex64::new(1.0, 0.0)), root));
    let mut h_sup: f64 = 0.0;
    let mut nodes = 0usize;
    let mut quiet = 0usize;
    let mut depth = 0usize;
    let budget = prm.tol * (1.0 - prm.kappa);
    loop {
        let mut next: BTreeMap<Index, (Jet, Jet)> = BTreeMap::new();
        let mut mass = 0.0;
        for (idx, (g, p)) in &level {
            nodes += 1;
            if nodes > prm.max_nodes {
                return Err(Error::NodeCap(prm.max_nodes));
            }
            if system.near_pole(p.value()) {
                return Err(Error::PoleProximity(p.value()));
            }
            let e = (system.eval)(p)?;
            let h_norm = e.h0.norm() + e.hk.iter().map(|h| h.norm()).sum::<f64>();
            h_sup = h_sup.max(h_norm);
            if b.len() < e.hk.len() {
                b.resize(e.hk.len(), zero);
            }
            a += *g * e.h0;
            for (bk, hk) in b.iter_mut().zip(&e.hk) {
                *bk += *g * *hk;
            }
            let gn = g.norm();
            mass += gn;
            // pruned branches contribute below the tail budget
            if gn * h_sup.max(1.0) < budget * 1e-3 {
                continue;
            }
            for (l, map) in system.maps.iter().enumerate() {
                let contrib = *g * e.coeffs[l];
                let q = map.apply_jet(p);
                match next.entry(child(idx, l)) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert((contrib, q));
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        o.get_mut().0 += contrib;
                    }
                }
            }
        }
        if !(a.is_finite() && b.iter().all(|x| x.is_finite())) {
            return Err(Error::Divergence(prm.kappa));
        }
        let tail = mass * h_sup.max(f64::MIN_POSITIVE) / (1.0 - prm.kappa);
        if tail < prm.tol || next.is_empty() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 3 || next.is_empty() {
            return Ok(SeriesValue { a, b, tail, depth, nodes, strategy: Strategy::Lattice });
        }
        level = next;
        depth += 1;
    }
}
