//! Dense complex linear solves.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest system the dense solver accepts.
pub const MAX_DIM: usize = 200;
const PIVOT_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub x: DVector<Complex64>,
    /// `max |A x - b|`
    pub residual: f64,
}

impl LinearSystem {
    pub fn new(matrix: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n || rhs.len() != n {
            return Err(Error::Domain(format!(
                "system shape {}x{} with rhs {}",
                n,
                matrix.ncols(),
                rhs.len()
            )));
        }
        if n > MAX_DIM {
            return Err(Error::Domain(format!("dimension {n} exceeds {MAX_DIM}")));
        }
        Ok(LinearSystem { matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// LU with partial pivoting. Pivots are compared against `1e-13` times the
/// largest entry of the matrix.
pub fn solve_linear(sys: &LinearSystem) -> Result<LinearSolution> {
    let scale = sys.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular(0.0));
    }
    let lu = sys.matrix.clone().lu();
    let u = lu.u();
    let min_pivot = (0..sys.dim()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if min_pivot < PIVOT_TOL * scale {
        return Err(Error::Singular(min_pivot / scale));
    }
    let x = lu.solve(&sys.rhs).ok_or(Error::Singular(min_pivot / scale))?;
    let r = &sys.matrix * &x - &sys.rhs;
    let residual = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(LinearSolution { x, residual })
}
