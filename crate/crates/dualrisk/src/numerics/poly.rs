//! Complex polynomials and sums of simple rational terms.
//!
//! [`RatSum`] holds expressions `sum_t c_t * prod_i (s - z_i)^(-e_i)`; every
//! transform of a phase-type law is of this shape, which lets root equations
//! be cleared to a polynomial numerator exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    /// `(s - z)^e`
    pub fn linear_power(z: Complex64, e: u32) -> Self {
        let mut p = Poly::constant(ONE);
        let f = Poly(vec![-z, ONE]);
        for _ in 0..e {
            p = p.mul(&f);
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ZERO, |acc, c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(ZERO);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![ZERO; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n)
            .map(|k| self.0.get(k).copied().unwrap_or(ZERO) + o.0.get(k).copied().unwrap_or(ZERO))
            .collect())
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    /// Drop leading coefficients that are negligible relative to the largest.
    pub fn trim(mut self, rel: f64) -> Poly {
        let big = self.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.0.len() > 1 && self.0.last().unwrap().norm() <= rel * big {
            self.0.pop();
        }
        self
    }

    /// Divide by `(s - z)`, returning quotient and remainder.
    pub fn deflate(&self, z: Complex64) -> (Poly, Complex64) {
        let n = self.0.len();
        if n <= 1 {
            return (Poly::constant(ZERO), self.0.first().copied().unwrap_or(ZERO));
        }
        let mut q = vec![ZERO; n - 1];
        let mut carry = self.0[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.0[k] + carry * z;
        }
        (Poly(q), carry)
    }

    /// All roots, from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.clone().trim(1e-14);
        let n = p.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = p.0[n];
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = ONE;
        }
        for i in 0..n {
            m[(i, n - 1)] = -p.0[i] / lead;
        }
        m.try_schur(1e-15, 10_000)
            .and_then(|s| s.eigenvalues())
            .map(|ev| ev.iter().copied().collect())
            .unwrap_or_default()
    }
}

/// One term `coef * prod (s - z)^(-e)`.
#[derive(Clone, Debug)]
pub struct RatTerm {
    pub coef: Complex64,
    pub factors: Vec<(Complex64, u32)>,
}

#[derive(Clone, Debug, Default)]
pub struct RatSum(pub Vec<RatTerm>);

fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

impl RatSum {
    pub fn constant(c: Complex64) -> Self {
        RatSum(vec![RatTerm { coef: c, factors: vec![] }])
    }

    /// `coef * (s - z)^(-e)`
    pub fn pole(coef: Complex64, z: Complex64, e: u32) -> Self {
        RatSum(vec![RatTerm { coef, factors: vec![(z, e)] }])
    }

    pub fn add(mut self, o: RatSum) -> RatSum {
        self.0.extend(o.0);
        self
    }

    pub fn scale(mut self, c: Complex64) -> RatSum {
        for t in &mut self.0 {
            t.coef *= c;
        }
        self
    }

    pub fn mul(&self, o: &RatSum) -> RatSum {
        let mut out = Vec::with_capacity(self.0.len() * o.0.len());
        for a in &self.0 {
            for b in &o.0 {
                let mut factors = a.factors.clone();
                for &(z, e) in &b.factors {
                    match factors.iter_mut().find(|(w, _)| same_point(*w, z)) {
                        Some(f) => f.1 += e,
                        None => factors.push((z, e)),
                    }
                }
                out.push(RatTerm { coef: a.coef * b.coef, factors });
            }
        }
        RatSum(out)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|t| t.factors.iter().fold(t.coef, |acc, &(z, e)| acc / (s - z).powu(e)))
            .sum()
    }

    /// Clear denominators: returns the numerator polynomial and the common
    /// denominator as `(point, multiplicity)` pairs, with any factor that also
    /// divides the numerator cancelled.
    pub fn clear(&self) -> (Poly, Vec<(Complex64, u32)>) {
        let mut den: Vec<(Complex64, u32)> = Vec::new();
        for t in &self.0 {
            for &(z, e) in &t.factors {
                match den.iter_mut().find(|(w, _)| same_point(*w, z)) {
                    Some(f) => f.1 = f.1.max(e),
                    None => den.push((z, e)),
                }
            }
        }
        let mut num = Poly::constant(ZERO);
        for t in &self.0 {
            let mut p = Poly::constant(t.coef);
            for &(z, e_max) in &den {
                let e = t
                    .factors
                    .iter()
                    .filter(|(w, _)| same_point(*w, z))
                    .map(|f| f.1)
                    .sum::<u32>();
                p = p.mul(&Poly::linear_power(z, e_max - e));
            }
            num = num.add(&p);
        }
        let mut num = num.trim(1e-13);
        for f in den.iter_mut() {
            while f.1 > 0 {
                let scale = num.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
                    * (1.0 + f.0.norm()).powi(num.degree() as i32);
                let (q, r) = num.deflate(f.0);
                if r.norm() > 1e-11 * scale.max(1e-300) || num.degree() == 0 {
                    break;
                }
                num = q;
                f.1 -= 1;
            }
        }
        den.retain(|f| f.1 > 0);
        (num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn roots_of_cubic() {
        // (s-1)(s-2)(s+3)
        let p = Poly::linear_power(c(1.0), 1)
            .mul(&Poly::linear_power(c(2.0), 1))
            .mul(&Poly::linear_power(c(-3.0), 1));
        let mut r: Vec<f64> = p.roots().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn deflate_exact_factor() {
        let p = Poly::linear_power(c(2.0), 2);
        let (q, r) = p.deflate(c(2.0));
        assert!(r.norm() < 1e-14);
        assert_eq!(q.degree(), 1);
    }

    #[test]
    fn clear_matches_direct_evaluation() {
        // 1 - 1/(s+1) - 2/(s-2)^2
        let f = RatSum::constant(c(1.0))
            .add(RatSum::pole(c(-1.0), c(-1.0), 1))
            .add(RatSum::pole(c(-2.0), c(2.0), 2));
        let (num, den) = f.clear();
        for s in [Complex64::new(0.3, 0.7), c(5.0), Complex64::new(-0.2, 2.0)] {
            let d: Complex64 = den.iter().map(|&(z, e)| (s - z).powu(e)).product();
            assert!((num.eval(s) / d - f.eval(s)).norm() < 1e-12);
        }
    }

    #[test]
    fn clear_cancels_common_factor() {
        // 1/(s-1) - 2/((s-1)(s+1)) = 1/(s+1)
        let h = RatSum::pole(c(1.0), c(1.0), 1).add(
            RatSum::pole(c(1.0), c(1.0), 1).mul(&RatSum::pole(c(1.0), c(-1.0), 1)).scale(c(-2.0)),
        );
        let (num, den) = h.clear();
        assert_eq!(num.degree(), 0);
        assert_eq!(den.len(), 1);
        assert!((den[0].0 - c(-1.0)).norm() < 1e-12 && den[0].1 == 1);
    }
}
