//! Numerical study of the radial Dirac system with a Coulomb-type
//! potential v(r) = -A/r + q(r).
//!
//! The library builds the closed-form pure-Coulomb solutions, solves the
//! perturbed system through Volterra integral equations, extracts the
//! generalized stationary scattering matrix and spectral density, realizes
//! the diagonalizing transforms of the free and full operators, and takes
//! the explicit time limits that define the generalized dynamical
//! scattering operator. The headline check is that the dynamical and
//! stationary scattering matrices agree on wave packets.

pub mod coulomb;
pub mod dynamics;
pub(crate) mod dd;
pub mod error;
pub mod grid;
pub mod ode;
pub mod perturb;
pub mod scatter;
pub mod spectral;
pub mod quadrature;
pub(crate) mod riccati;
pub mod specfun;

pub mod config;
pub mod report;
pub mod runner;
pub mod selftest;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
