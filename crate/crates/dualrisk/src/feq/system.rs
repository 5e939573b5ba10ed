//! Functional equations `rho(s) = sum_l c_l(s) rho(m_l(s)) + h0(s) + sum_k h_k(s) u_k`.

use crate::error::{Error, Result};
use crate::numerics::Jet;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// `s -> scale * s + shift`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: Complex64,
}

impl AffineMap {
    pub fn scaling(scale: f64) -> Self {
        AffineMap { scale, shift: Complex64::new(0.0, 0.0) }
    }

    pub fn apply(&self, s: Complex64) -> Complex64 {
        s * self.scale + self.shift
    }

    pub fn apply_jet(&self, s: &Jet) -> Jet {
        s.scale_re(self.scale).add_scalar(self.shift)
    }

    pub fn is_pure_scaling(&self) -> bool {
        self.shift.norm() == 0.0
    }

    pub fn fixed_point(&self) -> Complex64 {
        self.shift / (1.0 - self.scale)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale > 0.0 && self.scale < 1.0 && self.shift.re.is_finite() && self.shift.im.is_finite() {
            Ok(())
        } else {
            Err(Error::Divergence(self.scale))
        }
    }
}

/// Everything the equation needs at one point: map coefficients and the
/// constant terms split by unknown.
#[derive(Clone, Debug)]
pub struct NodeEval {
    pub coeffs: Vec<Jet>,
    pub h0: Jet,
    pub hk: Vec<Jet>,
}

pub type EvalFn = Arc<dyn Fn(&Jet) -> Result<NodeEval> + Send + Sync>;
pub type JetFn = Arc<dyn Fn(&Jet) -> Result<Jet> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownSource {
    /// Fixed by evaluating the series (or its derivative) at the point.
    Point,
    /// Fixed by an equation at a right-half-plane root.
    Root,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnknownDescriptor {
    pub point: Complex64,
    pub derivative_order: usize,
    pub label: String,
    pub source: UnknownSource,
}

/// Extra equations `0 = sum_l r_l(s) rho(m_l(s)) + r0(s) + sum_k r_k(s) u_k`
/// imposed at each listed root, where `raw` evaluates the undivided parts.
#[derive(Clone)]
pub struct RootEquations {
    pub roots: Vec<Complex64>,
    pub raw: EvalFn,
}

#[derive(Clone)]
pub struct FeqSystem {
    pub label: String,
    pub maps: Vec<AffineMap>,
    pub eval: EvalFn,
    pub unknowns: Vec<UnknownDescriptor>,
    pub extra: Option<RootEquations>,
    /// Points near which coefficients are singular (removable in the total).
    pub poles: Vec<Complex64>,
}

impl fmt::Debug for FeqSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeqSystem")
            .field("label", &self.label)
            .field("maps", &self.maps)
            .field("unknowns", &self.unknowns)
            .field("roots", &self.extra.as_ref().map(|e| e.roots.clone()))
            .finish()
    }
}

impl FeqSystem {
    /// Build from separate coefficient and constant-term closures.
    pub fn from_parts(
        label: &str,
        terms: Vec<(JetFn, AffineMap)>,
        h0: JetFn,
        hk: Vec<JetFn>,
        unknowns: Vec<UnknownDescriptor>,
    ) -> Self {
        let maps = terms.iter().map(|t| t.1).collect();
        let coeffs: Vec<JetFn> = terms.into_iter().map(|t| t.0).collect();
        let eval: EvalFn = Arc::new(move |s: &Jet| {
            Ok(NodeEval {
                coeffs: coeffs.iter().map(|c| c(s)).collect::<Result<_>>()?,
                h0: h0(s)?,
                hk: hk.iter().map(|h| h(s)).collect::<Result<_>>()?,
            })
        });
        FeqSystem { label: label.into(), maps, eval, unknowns, extra: None, poles: Vec::new() }
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_pure_scaling(&self) -> bool {
        self.maps.iter().all(|m| m.is_pure_scaling())
    }

    /// Common fixed point of the maps; they commute exactly when it exists.
    pub fn fixed_point(&self) -> Result<Complex64> {
        let Some(first) = self.maps.first() else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let p = first.fixed_point();
        for m in &self.maps[1..] {
            let q = m.fixed_point();
            // m1(m2(s)) - m2(m1(s)) = (1-a2) b1 ... reduces to the fixed-point gap
            let gap = (q - p).norm() * (1.0 - m.scale) * (1.0 - first.scale);
            if gap > 1e-10 * (1.0 + p.norm()) {
                return Err(Error::NonCommutingMaps(gap));
            }
        }
        Ok(p)
    }

    /// Limiting coefficient magnitudes at the common fixed point.
    pub fn limit_coefficients(&self) -> Result<Vec<f64>> {
        let p = self.fixed_point()?;
        let e = (self.eval)(&Jet::constant(p, p, 0))?;
        Ok(e.coeffs.iter().map(|c| c.value().norm()).collect())
    }

    /// `sum_l kappa_l`, refusing to proceed unless it is below one.
    pub fn contraction(&self) -> Result<f64> {
        for m in &self.maps {
            m.validate()?;
        }
        let k: f64 = self.limit_coefficients()?.iter().sum();
        if !(k < 1.0) {
            return Err(Error::Divergence(k));
        }
        Ok(k)
    }

    /// Same maps and coefficients with the unknowns substituted into the
    /// constant term.
    pub fn with_unknowns(&self, u: &[Complex64]) -> FeqSystem {
        let inner = self.eval.clone();
        let u = u.to_vec();
        let eval: EvalFn = Arc::new(move |s: &Jet| {
            let mut e = inner(s)?;
            for (h, uk) in e.hk.iter().zip(&u) {
                e.h0 += h.scale(*uk);
            }
            e.hk.clear();
            Ok(e)
        });
        FeqSystem {
            label: self.label.clone(),
            maps: self.maps.clone(),
            eval,
            unknowns: Vec::new(),
            extra: None,
            poles: self.poles.clone(),
        }
    }

    pub fn near_pole(&self, p: Complex64) -> bool {
        self.poles.iter().any(|q| (p - q).norm() < 1e-7 * (1.0 + q.norm()))
    }
}
