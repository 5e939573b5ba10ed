//! Numerical kernels shared by the solvers.

pub mod jet;
pub mod linalg;
pub mod poly;
pub mod quadrature;

pub use jet::{Jet, MAX_ORDER, binomial, factorial};
pub use linalg::{LinearSolution, LinearSystem, solve_linear};
pub use poly::{Poly, RatSum, RatTerm};
pub use quadrature::{gauss_legendre, gauss_legendre_composite, gauss_legendre_nodes};
