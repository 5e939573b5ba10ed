//! Mixed-Erlang laws and interarrival specifications.

use super::exppoly::{EpTerm, ExpPoly, Weight, WeightPart};
use crate::error::{Error, Result};
use crate::numerics::{Jet, MAX_ORDER, factorial};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

/// Guard radius around each pole `-rate` of a transform.
pub const POLE_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErlangComponent {
    pub weight: f64,
    pub rate: f64,
    pub stages: u32,
}

/// Finite mixture of Erlang laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistDecl", into = "DistDecl")]
pub struct PhaseDist {
    components: Vec<ErlangComponent>,
}

impl PhaseDist {
    pub fn new(components: Vec<ErlangComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("distribution has no components".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("component weights sum to {total}")));
        }
        for c in &components {
            if !(c.weight >= 0.0) || !(c.rate > 0.0) || !c.rate.is_finite() || c.stages == 0 {
                return Err(Error::InvalidParameter(format!("bad component {c:?}")));
            }
        }
        Ok(PhaseDist { components })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::erlang(1, rate)
    }

    pub fn erlang(stages: u32, rate: f64) -> Result<Self> {
        Self::new(vec![ErlangComponent { weight: 1.0, rate, stages }])
    }

    pub fn hyperexponential(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(weight, rate)| ErlangComponent { weight, rate, stages: 1 }).collect())
    }

    pub fn components(&self) -> &[ErlangComponent] {
        &self.components
    }

    pub fn max_stages(&self) -> u32 {
        self.components.iter().map(|c| c.stages).max().unwrap_or(1)
    }

    pub fn lst(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.lst_jet(s, 0)?.value())
    }

    /// Taylor jet of the transform `E e^(-sX)` at `s`.
    pub fn lst_jet(&self, s: Complex64, order: usize) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::Order(order, MAX_ORDER));
        }
        for c in &self.components {
            if (s + c.rate).norm() < POLE_GUARD {
                return Err(Error::Pole(s));
            }
        }
        Ok(self.lst_of(&Jet::var(s, order)))
    }

    /// Transform evaluated on an arbitrary jet argument (no pole check).
    pub fn lst_of(&self, s: &Jet) -> Jet {
        let mut acc = s.lift(Complex64::new(0.0, 0.0));
        for c in &self.components {
            let f = s.add_scalar(Complex64::new(c.rate, 0.0)).recip().scale_re(c.rate);
            acc += f.powi(c.stages as i32).scale_re(c.weight);
        }
        acc
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.pdf_exppoly().eval(x)
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.survival_exppoly().eval(x).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    pub fn cdf_pdf(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("x = {x} < 0")));
        }
        Ok((self.cdf(x), self.pdf(x)))
    }

    /// Density as `sum w r^n x^(n-1) e^(-r x) / (n-1)!`.
    pub fn pdf_exppoly(&self) -> ExpPoly {
        ExpPoly(
            self.components
                .iter()
                .map(|c| EpTerm {
                    coef: c.weight * c.rate.powi(c.stages as i32) / factorial(c.stages as usize - 1),
                    power: c.stages - 1,
                    rate: c.rate,
                })
                .collect(),
        )
        .normalized()
    }

    /// Survival function as `sum w e^(-r x) sum_(l<n) (r x)^l / l!`.
    pub fn survival_exppoly(&self) -> ExpPoly {
        let mut v = Vec::new();
        for c in &self.components {
            for l in 0..c.stages {
                v.push(EpTerm {
                    coef: c.weight * c.rate.powi(l as i32) / factorial(l as usize),
                    power: l,
                    rate: c.rate,
                });
            }
        }
        ExpPoly(v).normalized()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.stages as f64 / c.rate).sum()
    }

    pub fn variance(&self) -> f64 {
        let m2: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (c.stages as f64) * (c.stages as f64 + 1.0) / (c.rate * c.rate))
            .sum();
        m2 - self.mean().powi(2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u: f64 = rng.random();
        let mut pick = &self.components[self.components.len() - 1];
        for c in &self.components {
            if u < c.weight {
                pick = c;
                break;
            }
            u -= c.weight;
        }
        let mut x = 0.0;
        for _ in 0..pick.stages {
            x -= (1.0 - rng.random::<f64>()).ln();
        }
        x / pick.rate
    }

    /// Inverse cdf by safeguarded Newton iteration.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if self.components.len() == 1 && self.components[0].stages == 1 {
            return -(1.0 - p).ln() / self.components[0].rate;
        }
        let (mut lo, mut hi) = (0.0, self.mean().max(1e-12));
        while self.cdf(hi) < p {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return hi;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.pdf(x);
            let mut nx = if d > 0.0 { x - f / d } else { f64::NAN };
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if (nx - x).abs() <= 1e-15 * (1.0 + x) {
                return nx;
            }
            x = nx;
        }
        x
    }
}

/// Law of the gain interarrival times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistDecl", into = "DistDecl")]
pub enum InterarrivalSpec {
    Phase(PhaseDist),
    Deterministic(f64),
}

impl InterarrivalSpec {
    pub fn deterministic(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!("deterministic value {value}")));
        }
        Ok(InterarrivalSpec::Deterministic(value))
    }

    pub fn phase(&self) -> Option<&PhaseDist> {
        match self {
            InterarrivalSpec::Phase(p) => Some(p),
            _ => None,
        }
    }

    /// The phase law, or `NoDensity` for a point mass.
    pub fn density(&self) -> Result<&PhaseDist> {
        self.phase().ok_or(Error::NoDensity)
    }

    pub fn lst_jet(&self, s: Complex64, order: usize) -> Result<Jet> {
        match self {
            InterarrivalSpec::Phase(p) => p.lst_jet(s, order),
            InterarrivalSpec::Deterministic(_) => {
                if order > MAX_ORDER {
                    return Err(Error::Order(order, MAX_ORDER));
                }
                Ok(self.lst_of(&Jet::var(s, order)))
            }
        }
    }

    pub fn lst_of(&self, s: &Jet) -> Jet {
        match self {
            InterarrivalSpec::Phase(p) => p.lst_of(s),
            InterarrivalSpec::Deterministic(d) => s.scale_re(-d).exp(),
        }
    }

    pub fn cdf_pdf(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            InterarrivalSpec::Phase(p) => p.cdf_pdf(x),
            InterarrivalSpec::Deterministic(d) => {
                if !(x >= 0.0) {
                    return Err(Error::Domain(format!("x = {x} < 0")));
                }
                Ok((if x >= *d { 1.0 } else { 0.0 }, 0.0))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            InterarrivalSpec::Phase(p) => p.cdf(x),
            InterarrivalSpec::Deterministic(d) => (x >= *d) as u8 as f64,
        }
    }

    /// `P(X >= x)`
    pub fn tail_incl(&self, x: f64) -> f64 {
        match self {
            InterarrivalSpec::Phase(p) => p.survival(x),
            InterarrivalSpec::Deterministic(d) => (*d >= x) as u8 as f64,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            InterarrivalSpec::Phase(p) => p.mean(),
            InterarrivalSpec::Deterministic(d) => *d,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InterarrivalSpec::Phase(p) => p.sample(rng),
            InterarrivalSpec::Deterministic(d) => *d,
        }
    }

    /// The law as a weight on interarrival times.
    pub fn weight(&self) -> Weight {
        match self {
            InterarrivalSpec::Phase(p) => Weight::dense(p.pdf_exppoly()),
            InterarrivalSpec::Deterministic(d) => Weight(vec![WeightPart::Atom { mass: 1.0, at: *d }]),
        }
    }

    /// The survival function `P(X > t)` as a weight; its transform is
    /// `(1 - phi(s)) / s`.
    pub fn survival_weight(&self) -> Weight {
        match self {
            InterarrivalSpec::Phase(p) => Weight::dense(p.survival_exppoly()),
            InterarrivalSpec::Deterministic(d) => Weight(vec![WeightPart::Below(ExpPoly::term(1.0, 0, 0.0), *d)]),
        }
    }
}

impl From<PhaseDist> for InterarrivalSpec {
    fn from(p: PhaseDist) -> Self {
        InterarrivalSpec::Phase(p)
    }
}

/// Scenario-file form of a distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistDecl {
    Exponential { rate: f64 },
    Erlang { stages: u32, rate: f64 },
    Hyperexponential { components: Vec<HyperComponent> },
    MixedErlang { components: Vec<ComponentDecl> },
    Deterministic { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDecl {
    pub w: f64,
    pub rate: f64,
    pub stages: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperComponent {
    pub w: f64,
    pub rate: f64,
}

impl TryFrom<DistDecl> for InterarrivalSpec {
    type Error = Error;
    fn try_from(d: DistDecl) -> Result<Self> {
        match d {
            DistDecl::Deterministic { value } => InterarrivalSpec::deterministic(value),
            other => Ok(InterarrivalSpec::Phase(PhaseDist::try_from(other)?)),
        }
    }
}

impl TryFrom<DistDecl> for PhaseDist {
    type Error = Error;
    fn try_from(d: DistDecl) -> Result<Self> {
        match d {
            DistDecl::Exponential { rate } => PhaseDist::exponential(rate),
            DistDecl::Erlang { stages, rate } => PhaseDist::erlang(stages, rate),
            DistDecl::Hyperexponential { components } => {
                PhaseDist::hyperexponential(&components.iter().map(|c| (c.w, c.rate)).collect::<Vec<_>>())
            }
            DistDecl::MixedErlang { components } => PhaseDist::new(
                components
                    .into_iter()
                    .map(|c| ErlangComponent { weight: c.w, rate: c.rate, stages: c.stages })
                    .collect(),
            ),
            DistDecl::Deterministic { .. } => {
                Err(Error::InvalidParameter("a gain law must be phase-type, not deterministic".into()))
            }
        }
    }
}

impl From<PhaseDist> for DistDecl {
    fn from(p: PhaseDist) -> Self {
        DistDecl::MixedErlang {
            components: p
                .components
                .iter()
                .map(|c| ComponentDecl { w: c.weight, rate: c.rate, stages: c.stages })
                .collect(),
        }
    }
}

impl From<InterarrivalSpec> for DistDecl {
    fn from(s: InterarrivalSpec) -> Self {
        match s {
            InterarrivalSpec::Phase(p) => p.into(),
            InterarrivalSpec::Deterministic(value) => DistDecl::Deterministic { value },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre_composite;
    use rand::SeedableRng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lst_at_zero_is_one() {
        let d = PhaseDist::exponential(2.0).unwrap();
        assert!((d.lst(c(0.0)).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn erlang_lst_against_quadrature() {
        let d = PhaseDist::erlang(2, 3.0).unwrap();
        let v = d.lst(c(3.0)).unwrap();
        assert!((v.re - 0.25).abs() < 1e-15);
        let q = gauss_legendre_composite(|x| c((-3.0 * x).exp() * d.pdf(x)), 0.0, 40.0, 20, 40);
        assert!((q.re - 0.25).abs() < 1e-10);
    }

    #[test]
    fn exponential_jet_matches_derivative() {
        let d = PhaseDist::exponential(1.0).unwrap();
        let j = d.lst_jet(c(1.0), 1).unwrap();
        assert!((j.coeff(0) - c(0.5)).norm() < 1e-15);
        assert!((j.coeff(1) - c(-0.25)).norm() < 1e-15);
    }

    #[test]
    fn pole_is_rejected() {
        let d = PhaseDist::exponential(2.0).unwrap();
        assert!(matches!(d.lst_jet(c(-2.0), 0), Err(Error::Pole(_))));
    }

    #[test]
    fn cdf_examples() {
        let e = PhaseDist::exponential(1.0).unwrap();
        assert_eq!(e.cdf_pdf(0.0).unwrap(), (0.0, 1.0));
        assert!(matches!(e.cdf_pdf(-1.0), Err(Error::Domain(_))));
        let er = PhaseDist::erlang(2, 1.0).unwrap();
        assert!(er.cdf(60.0) > 1.0 - 1e-15);
        let h = PhaseDist::hyperexponential(&[(0.5, 1.0), (0.5, 2.0)]).unwrap();
        let expect = 0.5 * (1.0 - (-1.0f64).exp()) + 0.5 * (1.0 - (-2.0f64).exp());
        assert!((h.cdf(1.0) - expect).abs() < 1e-15);
        let integral = gauss_legendre_composite(|x| c(h.pdf(x)), 0.0, 1.0, 16, 2);
        assert!((integral.re - expect).abs() < 1e-14);
    }

    #[test]
    fn mixed_erlang_cdf_matches_displayed_form() {
        // k_1 Erlang(1) + k_2 Erlang(2) + k_3 Erlang(3), common rate
        let mu = 1.3;
        let ks = [0.2, 0.5, 0.3];
        let d = PhaseDist::new(
            ks.iter()
                .enumerate()
                .map(|(i, &w)| ErlangComponent { weight: w, rate: mu, stages: i as u32 + 1 })
                .collect(),
        )
        .unwrap();
        for x in [0.1, 1.0, 4.0] {
            let mut expect = 0.0;
            for (i, &k) in ks.iter().enumerate() {
                let n = i + 1;
                let tail: f64 = (0..n).map(|l| (mu * x).powi(l as i32) / factorial(l)).sum();
                expect += k * (1.0 - (-mu * x).exp() * tail);
            }
            assert!((d.cdf(x) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = PhaseDist::new(vec![
            ErlangComponent { weight: 0.4, rate: 1.0, stages: 3 },
            ErlangComponent { weight: 0.6, rate: 2.5, stages: 1 },
        ])
        .unwrap();
        for p in [1e-6, 0.1, 0.5, 0.9, 0.999999] {
            assert!((d.cdf(d.quantile(p)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_sampling_and_transform() {
        let d = InterarrivalSpec::deterministic(3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(d.sample(&mut rng), 3.0);
        let j = d.lst_jet(c(0.5), 1).unwrap();
        assert!((j.value() - c((-1.5f64).exp())).norm() < 1e-15);
        assert!((j.coeff(1) + c(3.0 * (-1.5f64).exp())).norm() < 1e-14);
        assert!(matches!(d.density(), Err(Error::NoDensity)));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(PhaseDist::hyperexponential(&[(0.5, 1.0), (0.4, 2.0)]).is_err());
        assert!(PhaseDist::erlang(0, 1.0).is_err());
        assert!(PhaseDist::exponential(-1.0).is_err());
    }

    #[test]
    fn survival_weight_gives_no_jump_term() {
        for spec in [
            InterarrivalSpec::Phase(PhaseDist::erlang(3, 2.0).unwrap()),
            InterarrivalSpec::deterministic(0.8).unwrap(),
        ] {
            let s = Complex64::new(0.7, 1.3);
            let direct = (1.0 - spec.lst_of(&Jet::constant(s, s, 0)).value()) / s;
            assert!((spec.survival_weight().lt(s) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn decl_roundtrip() {
        let d: InterarrivalSpec = toml::from_str("kind = \"erlang\"\nstages = 2\nrate = 3.0").unwrap();
        let back: InterarrivalSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(d, back);
    }
}
