//! Exponential polynomials `sum c x^k e^(-r x)` and their Laplace transforms.

use crate::numerics::{Jet, RatSum, factorial};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpTerm {
    pub coef: f64,
    pub power: u32,
    pub rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly(pub Vec<EpTerm>);

impl ExpPoly {
    pub fn term(coef: f64, power: u32, rate: f64) -> Self {
        ExpPoly(vec![EpTerm { coef, power, rate }])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().map(|t| t.coef * x.powi(t.power as i32) * (-t.rate * x).exp()).sum()
    }

    pub fn add(&self, o: &ExpPoly) -> ExpPoly {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        ExpPoly(v).normalized()
    }

    pub fn scale(&self, c: f64) -> ExpPoly {
        ExpPoly(self.0.iter().map(|t| EpTerm { coef: t.coef * c, ..*t }).collect())
    }

    pub fn mul(&self, o: &ExpPoly) -> ExpPoly {
        let mut v = Vec::with_capacity(self.0.len() * o.0.len());
        for a in &self.0 {
            for b in &o.0 {
                v.push(EpTerm { coef: a.coef * b.coef, power: a.power + b.power, rate: a.rate + b.rate });
            }
        }
        ExpPoly(v).normalized()
    }

    pub fn powi(&self, n: u32) -> ExpPoly {
        (0..n).fold(ExpPoly::term(1.0, 0, 0.0), |acc, _| acc.mul(self))
    }

    /// Merge like terms and drop those cancelled to rounding level.
    pub fn normalized(self) -> ExpPoly {
        let mut out: Vec<EpTerm> = Vec::new();
        for t in self.0 {
            match out.iter_mut().find(|u| {
                u.power == t.power && (u.rate - t.rate).abs() <= 1e-12 * (1.0 + t.rate.abs())
            }) {
                Some(u) => u.coef += t.coef,
                None => out.push(t),
            }
        }
        let big = out.iter().map(|t| t.coef.abs()).fold(0.0, f64::max);
        out.retain(|t| t.coef.abs() > 1e-13 * big && t.coef != 0.0);
        out.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(a.power.cmp(&b.power)));
        ExpPoly(out)
    }

    /// `int_0^inf f`
    pub fn integral(&self) -> f64 {
        self.0.iter().map(|t| t.coef * factorial(t.power as usize) / t.rate.powi(t.power as i32 + 1)).sum()
    }

    /// Laplace transform at a jet argument.
    pub fn lt_jet(&self, sigma: &Jet) -> Jet {
        let mut acc = sigma.lift(Complex64::new(0.0, 0.0));
        for t in &self.0 {
            let k = t.power as usize;
            acc += sigma.add_scalar(Complex64::new(t.rate, 0.0)).powi(-(k as i32 + 1)).scale_re(t.coef * factorial(k));
        }
        acc
    }

    pub fn lt(&self, s: Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|t| t.coef * factorial(t.power as usize) / (s + t.rate).powu(t.power + 1))
            .sum()
    }

    /// Laplace transform at `sigma = a s + b`, as a rational function of `s`.
    pub fn lt_ratsum(&self, a: f64, b: Complex64) -> RatSum {
        let mut out = RatSum::default();
        for t in &self.0 {
            let e = t.power + 1;
            let z = -(b + t.rate) / a;
            out = out.add(RatSum::pole(
                Complex64::new(t.coef * factorial(t.power as usize) / a.powi(e as i32), 0.0),
                z,
                e,
            ));
        }
        out
    }

    pub fn rates(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.0.iter().map(|t| t.rate).collect();
        r.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        r
    }
}

/// `int_0^d t^m e^(-q t) dt`.
pub fn lower_gamma_integral(m: u32, q: Complex64, d: f64) -> Complex64 {
    let z = q * d;
    if z.norm() < 2.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(d.powi(m as i32 + 1), 0.0);
        for n in 0..200 {
            let term = pw / (m as f64 + n as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
            pw *= -z / (n as f64 + 1.0);
        }
        sum
    } else {
        let mut partial = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for i in 0..=m {
            partial += pw;
            pw *= z / (i as f64 + 1.0);
        }
        factorial(m as usize) / q.powu(m + 1) * (1.0 - (-z).exp() * partial)
    }
}

/// One piece of an interarrival weight function.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightPart {
    Dense(ExpPoly),
    /// `f(t) 1(t <= cutoff)`
    Below(ExpPoly, f64),
    /// Point mass at `at`.
    Atom { mass: f64, at: f64 },
}

/// A nonnegative weight on interarrival times (a density, possibly truncated,
/// or point masses), only ever used through its Laplace transform.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Weight(pub Vec<WeightPart>);

impl Weight {
    pub fn dense(p: ExpPoly) -> Self {
        Weight(vec![WeightPart::Dense(p)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|p| match p {
            WeightPart::Dense(e) | WeightPart::Below(e, _) => e.is_empty(),
            WeightPart::Atom { mass, .. } => *mass == 0.0,
        })
    }

    pub fn scale(&self, c: f64) -> Weight {
        Weight(
            self.0
                .iter()
                .map(|p| match p {
                    WeightPart::Dense(e) => WeightPart::Dense(e.scale(c)),
                    WeightPart::Below(e, d) => WeightPart::Below(e.scale(c), *d),
                    WeightPart::Atom { mass, at } => WeightPart::Atom { mass: mass * c, at: *at },
                })
                .collect(),
        )
    }

    pub fn add(&self, o: &Weight) -> Weight {
        let mut v = self.0.clone();
        v.extend(o.0.iter().cloned());
        Weight(v)
    }

    /// Laplace transform `int e^(-sigma t) w(t) dt` at a jet argument.
    pub fn lt_jet(&self, sigma: &Jet) -> Jet {
        let mut acc = sigma.lift(Complex64::new(0.0, 0.0));
        for p in &self.0 {
            match p {
                WeightPart::Dense(e) => acc += e.lt_jet(sigma),
                WeightPart::Atom { mass, at } => acc += sigma.scale_re(-at).exp().scale_re(*mass),
                WeightPart::Below(e, d) => {
                    for t in &e.0 {
                        // derivative j in q is (-1)^j times the integral with power m+j
                        let q = sigma.add_scalar(Complex64::new(t.rate, 0.0));
                        let q0 = q.value();
                        let n = q.order();
                        let coeffs: Vec<Complex64> = (0..=n)
                            .map(|j| {
                                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                                lower_gamma_integral(t.power + j as u32, q0, *d) * sign / factorial(j)
                            })
                            .collect();
                        let outer = Jet::from_coeffs(q0, &coeffs).expect("order within bounds");
                        acc += outer.compose(&q).scale_re(t.coef);
                    }
                }
            }
        }
        acc
    }

    pub fn lt(&self, s: Complex64) -> Complex64 {
        self.lt_jet(&Jet::constant(s, s, 0)).value()
    }

    /// Total mass.
    pub fn mass(&self) -> f64 {
        self.lt(Complex64::new(0.0, 0.0)).re
    }

    /// Rational form in `s` of the transform at `a s + b`; `None` when a part
    /// is not a plain exponential polynomial.
    pub fn lt_ratsum(&self, a: f64, b: Complex64) -> Option<RatSum> {
        let mut out = RatSum::default();
        for p in &self.0 {
            match p {
                WeightPart::Dense(e) => out = out.add(e.lt_ratsum(a, b)),
                _ => return None,
            }
        }
        Some(out)
    }

    /// Points `sigma` where the transform is singular.
    pub fn poles(&self) -> Vec<f64> {
        self.0
            .iter()
            .flat_map(|p| match p {
                WeightPart::Dense(e) => e.rates().into_iter().map(|r| -r).collect(),
                _ => Vec::new(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre_composite;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lt_of_exponential() {
        let e = ExpPoly::term(2.0, 0, 2.0);
        assert!((e.lt(c(1.0)) - c(2.0 / 3.0)).norm() < 1e-15);
        assert!((e.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_merges_terms() {
        let a = ExpPoly::term(1.0, 0, 1.0).add(&ExpPoly::term(1.0, 0, 2.0));
        let sq = a.mul(&a);
        assert_eq!(sq.0.len(), 3);
        for x in [0.0, 0.5, 3.0] {
            assert!((sq.eval(x) - a.eval(x).powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn lower_gamma_branches_agree_with_quadrature() {
        for (m, q, d) in [(0u32, c(0.5), 1.0), (2, Complex64::new(3.0, 4.0), 1.5), (3, c(1.9), 1.0)] {
            let direct = gauss_legendre_composite(
                |t| t.powi(m as i32) * (-q * t).exp(),
                0.0,
                d,
                16,
                8,
            );
            assert!((lower_gamma_integral(m, q, d) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn truncated_weight_jet_matches_finite_differences() {
        let w = Weight(vec![WeightPart::Below(ExpPoly::term(1.0, 1, 1.0), 0.7)]);
        let s0 = Complex64::new(0.8, 0.3);
        let j = w.lt_jet(&Jet::var(s0, 2));
        let h = 1e-4;
        let d1 = (w.lt(s0 + h) - w.lt(s0 - h)) / (2.0 * h);
        let d2 = (w.lt(s0 + h) - 2.0 * w.lt(s0) + w.lt(s0 - h)) / (h * h);
        assert!((j.derivative(1) - d1).norm() < 1e-7);
        assert!((j.derivative(2) - d2).norm() < 1e-5);
    }

    #[test]
    fn ratsum_form_agrees() {
        let e = ExpPoly::term(1.5, 2, 0.7).add(&ExpPoly::term(-0.3, 0, 2.0));
        let r = e.lt_ratsum(0.5, c(0.2));
        let s = Complex64::new(1.1, -0.4);
        assert!((r.eval(s) - e.lt(0.5 * s + 0.2)).norm() < 1e-13);
    }
}
