//! Complex-parameter special functions behind the closed-form solutions:
//! the gamma function, Kummer's Phi, Tricomi's Psi and their large-argument
//! expansions.
//!
//! Branch convention: every power x^mu is the principal branch (cut along
//! the negative real axis). The solution formulas only ever evaluate on
//! the positive imaginary axis, well away from the cut.

mod gamma;
mod kummer;
mod tricomi;

pub use gamma::{gamma_complex, recip_gamma};
pub use kummer::{
    kummer_phi, phi_asymptotic_value, phi_large_x, phi_recessive_value, psi_asymptotic_value,
    BranchTerm, PhiLargeX, SERIES_SWITCH_RADIUS,
};
pub use tricomi::tricomi_psi;

use num_complex::Complex64;

/// Leading term plus first 1/r correction of an asymptotic envelope.
///
/// `eval(r)` returns `leading * (1 + correction_1_over_r / r)`; the
/// discarded tail is bounded by `remainder_bound / r^2`.
#[derive(Debug, Clone)]
pub struct AsymptoticExpansion {
    pub leading: Complex64,
    pub correction_1_over_r: Complex64,
    pub remainder_bound: f64,
}

impl AsymptoticExpansion {
    pub fn eval(&self, r: f64) -> Complex64 {
        self.leading * (Complex64::new(1.0, 0.0) + self.correction_1_over_r / r)
    }

    pub fn error_bound(&self, r: f64) -> f64 {
        self.remainder_bound / (r * r)
    }
}
