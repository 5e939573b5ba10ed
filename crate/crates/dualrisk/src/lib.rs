pub mod error;
pub mod feq;
pub mod inversion;
pub mod models;
pub mod catalog;
pub mod cli;
pub mod copulas;
pub mod distributions;
pub mod numerics;
pub mod roots;
pub mod selfcheck;
pub mod simulator;

pub use error::{Error, Result};
