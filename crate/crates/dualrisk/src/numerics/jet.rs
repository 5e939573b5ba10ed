//! Truncated complex Taylor series.
//!
//! A [`Jet`] holds `f(s0 + e) = c0 + c1 e + ... + cn e^n` for a fixed expansion
//! point `s0`. Arithmetic is the exact truncation of formal power-series
//! arithmetic, so derivatives of any expression built from these operations are
//! exact up to rounding.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 15;
const N: usize = MAX_ORDER + 1;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    center: Complex64,
    order: usize,
    c: [Complex64; N],
}

impl Jet {
    pub fn constant(value: Complex64, center: Complex64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} > {MAX_ORDER}");
        let mut c = [ZERO; N];
        c[0] = value;
        Jet { center, order, c }
    }

    /// The identity series `s` expanded at `center`.
    pub fn var(center: Complex64, order: usize) -> Self {
        let mut j = Self::constant(center, center, order);
        if order > 0 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Build from explicit Taylor coefficients.
    pub fn from_coeffs(center: Complex64, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("empty coefficient list".into()));
        }
        let order = coeffs.len() - 1;
        if order > MAX_ORDER {
            return Err(Error::Order(order, MAX_ORDER));
        }
        let mut c = [ZERO; N];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Jet { center, order, c })
    }

    /// A constant with the same expansion point and order as `self`.
    pub fn lift(&self, value: Complex64) -> Self {
        Self::constant(value, self.center, self.order)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        if k <= self.order { self.c[k] } else { ZERO }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c[..=self.order]
    }

    /// k-th derivative at the center (`k! * c_k`).
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.coeff(k) * factorial(k)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest coefficient modulus.
    pub fn norm(&self) -> f64 {
        self.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn same_shape(&self, o: &Jet) -> bool {
        self.order == o.order && (self.center - o.center).norm() <= 1e-12 * (1.0 + self.center.norm())
    }

    pub fn try_mul(&self, o: &Jet) -> Result<Jet> {
        if !self.same_shape(o) {
            return Err(Error::Mismatch);
        }
        Ok(*self * *o)
    }

    pub fn try_div(&self, o: &Jet) -> Result<Jet> {
        if !self.same_shape(o) {
            return Err(Error::Mismatch);
        }
        if o.c[0].norm() <= 1e-12 {
            return Err(Error::DivByZeroJet);
        }
        Ok(*self / *o)
    }

    pub fn scale(mut self, k: Complex64) -> Jet {
        for z in self.c[..=self.order].iter_mut() {
            *z *= k;
        }
        self
    }

    pub fn scale_re(self, k: f64) -> Jet {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn add_scalar(mut self, k: Complex64) -> Jet {
        self.c[0] += k;
        self
    }

    pub fn recip(&self) -> Jet {
        self.lift(Complex64::new(1.0, 0.0)) / *self
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut base = *self;
        let mut acc = self.lift(Complex64::new(1.0, 0.0));
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let mut e = self.lift(self.c[0].exp());
        for k in 1..=self.order {
            let mut s = ZERO;
            for j in 1..=k {
                s += self.c[j] * e.c[k - j] * j as f64;
            }
            e.c[k] = s / k as f64;
        }
        e
    }

    pub fn ln(&self) -> Jet {
        let a0 = self.c[0];
        let mut l = self.lift(a0.ln());
        for k in 1..=self.order {
            let mut s = ZERO;
            for j in 1..k {
                s += l.c[j] * self.c[k - j] * j as f64;
            }
            l.c[k] = (self.c[k] - s / k as f64) / a0;
        }
        l
    }

    /// Re-expand the series as a function of `t` where `s = center + slope * t`
    /// composed with an inner jet: returns `self(inner)` assuming `inner.value()`
    /// equals this jet's center.
    pub fn compose(&self, inner: &Jet) -> Jet {
        let mut d = *inner;
        d.c[0] = ZERO;
        let mut out = inner.lift(self.c[self.order]);
        for k in (0..self.order).rev() {
            out = (out * d).add_scalar(self.c[k]);
        }
        out
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for k in 0..=self.order {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for k in 0..=self.order {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_re(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = self.lift(ZERO);
        for i in 0..=self.order {
            if self.c[i] == ZERO {
                continue;
            }
            for j in 0..=(self.order - i) {
                r.c[i + j] += self.c[i] * o.c[j];
            }
        }
        r
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut r = self.lift(ZERO);
        let inv = o.c[0].inv();
        for k in 0..=self.order {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * r.c[k - j];
            }
            r.c[k] = s * inv;
        }
        r
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, o: Jet) {
        *self = *self - o;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, o: Jet) {
        *self = *self * o;
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, k: Complex64) -> Jet {
        self.scale(k)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale_re(k)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, k: f64) -> Jet {
        self.add_scalar(Complex64::new(k, 0.0))
    }
}

impl Add<Complex64> for Jet {
    type Output = Jet;
    fn add(self, k: Complex64) -> Jet {
        self.add_scalar(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_of_conjugate_binomials() {
        let s = Jet::var(c(0.0), 2);
        let p = (s + 1.0) * (-s + 1.0);
        assert_eq!(p.coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
    }

    #[test]
    fn truncation_drops_square() {
        let s = Jet::var(c(0.0), 1);
        let p = (s + 1.0) * (s + 1.0);
        assert_eq!(p.coeffs(), &[c(1.0), c(2.0)]);
    }

    #[test]
    fn geometric_series() {
        let s = Jet::var(c(0.0), 2);
        let g = (-s + 1.0).recip();
        for k in 0..=2 {
            assert!((g.coeff(k) - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pole_derivative_at_half() {
        let s = Jet::var(c(0.5), 1);
        let g = (-s + 1.0).recip();
        assert!((g.coeff(0) - c(2.0)).norm() < 1e-14);
        assert!((g.coeff(1) - c(4.0)).norm() < 1e-14);
    }

    #[test]
    fn self_division_is_one() {
        let s = Jet::var(Complex64::new(0.3, 0.7), 3);
        let a = (s * s + 2.0).exp();
        let q = a / a;
        assert!((q.coeff(0) - c(1.0)).norm() < 1e-14);
        for k in 1..=3 {
            assert!(q.coeff(k).norm() < 1e-13);
        }
    }

    #[test]
    fn division_check_rejects_zero_leading() {
        let s = Jet::var(c(0.0), 2);
        assert!(matches!(s.lift(c(1.0)).try_div(&s), Err(Error::DivByZeroJet)));
        let t = Jet::var(c(1.0), 2);
        assert!(matches!(s.try_mul(&t), Err(Error::Mismatch)));
    }

    #[test]
    fn product_of_transforms_matches_finite_differences() {
        // 1/(1+s)^2 at s = 1
        let f = |s: f64| 1.0 / ((1.0 + s) * (1.0 + s));
        let s = Jet::var(c(1.0), 2);
        let a = (s + 1.0).recip();
        let p = a * a;
        let h = 1e-3;
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let d2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
        assert!((p.derivative(1).re - d1).abs() < 1e-6);
        assert!((p.derivative(2).re - d2).abs() < 1e-6);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let s = Jet::var(Complex64::new(0.4, -0.2), 5);
        let a = (s * s + s * 3.0 + 2.0).ln().exp();
        let b = s * s + s * 3.0 + 2.0;
        for k in 0..=5 {
            assert!((a.coeff(k) - b.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn compose_shifts_expansion() {
        // f(s) = 1/(1+s) at s=2, composed with s = 2 + 3t gives 1/(3+3t)
        let f = (Jet::var(c(2.0), 3) + 1.0).recip();
        let inner = Jet::var(c(0.0), 3) * 3.0 + 2.0;
        let g = f.compose(&inner);
        let expect = (Jet::var(c(0.0), 3) * 3.0 + 3.0).recip();
        for k in 0..=3 {
            assert!((g.coeff(k) - expect.coeff(k)).norm() < 1e-14);
        }
    }
}
