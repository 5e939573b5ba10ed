//! Gain and interarrival laws.

pub mod exppoly;
pub mod phase;

pub use exppoly::{EpTerm, ExpPoly, Weight, WeightPart};
pub use phase::{DistDecl, ErlangComponent, InterarrivalSpec, PhaseDist};

use crate::error::Result;
use crate::numerics::Jet;
use num_complex::Complex64;

/// Transform jet of any supported law.
pub fn lst_jet(dist: &InterarrivalSpec, s: Complex64, order: usize) -> Result<Jet> {
    dist.lst_jet(s, order)
}

pub fn cdf_pdf(dist: &InterarrivalSpec, x: f64) -> Result<(f64, f64)> {
    dist.cdf_pdf(x)
}
