//! Numerical solver for the constrained three-measure vector equilibrium problem of the
//! Hermitian two-matrix model with quartic `W(y) = y^4/4 + alpha y^2/2`.

pub mod classify;
pub mod cli;
pub mod equilibrium;
pub mod finite_n;
pub mod error;
pub mod params;
pub mod pearcey;
pub mod quad;
pub mod saddle;
pub mod spectral;

pub use error::{Error, Result};
pub use params::ModelParams;

pub type C64 = num_complex::Complex64;
