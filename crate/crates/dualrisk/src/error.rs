//! Error type shared by every module.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transform evaluated at a pole: s = {0}")]
    Pole(Complex64),
    #[error("jet order {0} exceeds the supported maximum {1}")]
    Order(usize, usize),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("jets have mismatched centers or orders")]
    Mismatch,
    #[error("jet division by a series with vanishing leading coefficient")]
    DivByZeroJet,
    #[error("singular linear system (pivot {0:.3e})")]
    Singular(f64),
    #[error("distribution has no density")]
    NoDensity,
    #[error("rejection sampler exceeded {0} trials")]
    RejectionBudget(usize),
    #[error("maps do not commute (composite points differ by {0:.3e})")]
    NonCommutingMaps(f64),
    #[error("series does not contract: sum of limiting coefficients is {0:.6}")]
    Divergence(f64),
    #[error("composite point {0} lies within the guard radius of a coefficient pole")]
    PoleProximity(Complex64),
    #[error("count mismatch: expected {expected}, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("convergence guard violated: {0}")]
    ConvergenceGuard(String),
    #[error("functional not available for this model: {0}")]
    UnsupportedFunctional(String),
    #[error("function vanishes on the contour near {0}")]
    OnContourZero(Complex64),
    #[error("winding number did not stabilise when enlarging the radius")]
    NonConvergedRadius,
    #[error("inversion node {0} sits on a flagged singular point")]
    NodeOnPole(f64),
    #[error("lattice exceeded {0} nodes and no fallback strategy applies")]
    NodeCap(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidParameter(_) => 2,
            Error::UnsupportedCombination(_)
            | Error::ConvergenceGuard(_)
            | Error::UnsupportedFunctional(_)
            | Error::NoDensity => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
