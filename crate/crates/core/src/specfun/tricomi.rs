use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::gamma::{gamma_complex, recip_gamma};
use crate::specfun::kummer::{kummer_phi, psi_asymptotic_value, SERIES_SWITCH_RADIUS};

fn check_c_noninteger(c: Complex64) -> Result<()> {
    let near = c.re.round();
    if (c - near).norm() < 1e-9 {
        return Err(Error::DegenerateParameter(format!(
            "Tricomi lower parameter {c} within 1e-9 of an integer"
        )));
    }
    Ok(())
}

/// Tricomi confluent hypergeometric function of the second kind,
/// principal branch of x^(-a) and x^(1-c).
///
/// Inside the series radius it is assembled from the two-Phi connection
/// formula, which requires non-integer c; the admissible systems here
/// have irrational 2*gamma + 1, so the guard only trips on misuse.
pub fn tricomi_psi(a: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    if x.norm() == 0.0 {
        return Err(Error::DegenerateParameter(
            "Psi is singular at x = 0".into(),
        ));
    }
    if x.norm() > SERIES_SWITCH_RADIUS {
        let (value, err) = psi_asymptotic_value(a, c, x);
        if err > 1e-10 * value.norm().max(1e-300) {
            return Err(Error::NonConvergence(format!(
                "asymptotic tail {err:e} too large for psi({a},{c},{x})"
            )));
        }
        return Ok(value);
    }
    check_c_noninteger(c)?;
    let one = Complex64::new(1.0, 0.0);
    let term1 = gamma_complex(one - c)? * recip_gamma(a - c + one) * kummer_phi(a, c, x)?;
    let term2 = gamma_complex(c - one)?
        * recip_gamma(a)
        * x.powc(one - c)
        * kummer_phi(a - c + one, 2.0 * one - c, x)?;
    Ok(term1 + term2)
}
