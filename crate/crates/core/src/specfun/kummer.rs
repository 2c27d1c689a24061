use num_complex::Complex64;

use crate::dd::DdComplex;
use crate::error::{Error, Result};
use crate::specfun::gamma::recip_gamma;
use crate::specfun::AsymptoticExpansion;

/// Radius where evaluation switches from the Taylor series to the
/// large-argument expansion. Below it the series is summed (in
/// double-double once cancellation bites), above it the expansion's
/// optimally truncated tail is already under 1e-13.
pub const SERIES_SWITCH_RADIUS: f64 = 30.0;

const SERIES_MAX_TERMS: usize = 10_000;
const SERIES_STOP_REL: f64 = 1e-17;
/// Cancellation threshold: below this |x| the plain f64 series keeps
/// enough digits, above it the accumulation runs in double-double.
const DD_THRESHOLD: f64 = 4.0;

fn check_c(c: Complex64) -> Result<()> {
    let near = c.re.round();
    if near <= 0.0 && (c - near).norm() < 1e-9 {
        return Err(Error::DegenerateParameter(format!(
            "lower parameter {c} at a non-positive integer"
        )));
    }
    Ok(())
}

/// Kummer confluent hypergeometric function of the first kind.
pub fn kummer_phi(a: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    check_c(c)?;
    if x.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if (a - c).norm() < 1e-14 {
        return Ok(x.exp());
    }
    if x.norm() <= SERIES_SWITCH_RADIUS {
        if x.norm() <= DD_THRESHOLD {
            series_f64(a, c, x)
        } else {
            series_dd(a, c, x)
        }
    } else {
        let (value, err) = phi_asymptotic_value(a, c, x);
        if err > 1e-10 * value.norm().max(1e-300) {
            return Err(Error::NonConvergence(format!(
                "asymptotic tail {err:e} too large for phi({a},{c},{x})"
            )));
        }
        Ok(value)
    }
}

fn series_f64(a: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * x / ((c + nf) * (nf + 1.0));
        sum += term;
        if term.norm() < SERIES_STOP_REL * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(format!(
        "series for phi({a},{c},{x}) hit the term cap"
    )))
}

fn series_dd(a: Complex64, c: Complex64, x: Complex64) -> Result<Complex64> {
    let a_dd = DdComplex::from_c64(a);
    let c_dd = DdComplex::from_c64(c);
    let x_dd = DdComplex::from_c64(x);
    let mut term = DdComplex::ONE;
    let mut sum = DdComplex::ONE;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let den = c_dd.add_f64_re(nf).mul_f64(nf + 1.0);
        term = term.mul(a_dd.add_f64_re(nf)).mul(x_dd).div(den);
        sum = sum.add(term);
        if term.norm_f64() < SERIES_STOP_REL * sum.norm_f64() {
            return Ok(sum.to_c64());
        }
    }
    Err(Error::NonConvergence(format!(
        "dd series for phi({a},{c},{x}) hit the term cap"
    )))
}

/// Asymptotic sum of the 2F0-type series sum_s (p)_s (q)_s / s! * w^s,
/// truncated at the smallest term. Returns (sum, first omitted |term|).
fn poincare_series(p: Complex64, q: Complex64, w: Complex64) -> (Complex64, f64) {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut best = f64::INFINITY;
    for s in 0..64 {
        let sf = s as f64;
        let next = term * (p + sf) * (q + sf) * w / (sf + 1.0);
        if next.norm() >= term.norm() || !next.norm().is_finite() {
            return (sum, term.norm().min(best));
        }
        term = next;
        sum += term;
        best = best.min(term.norm());
        if term.norm() < 1e-17 * sum.norm() {
            return (sum, term.norm());
        }
    }
    (sum, best)
}

/// Large-|x| value of Phi via the compound two-branch expansion.
/// Returns (value, absolute error estimate).
pub fn phi_asymptotic_value(a: Complex64, c: Complex64, x: Complex64) -> (Complex64, f64) {
    let i = Complex64::i();
    // e^{+i pi a} for Im x >= 0, e^{-i pi a} otherwise.
    let sign = if x.im >= 0.0 { 1.0 } else { -1.0 };
    let phase = (i * std::f64::consts::PI * a * sign).exp();

    let (s1, e1) = poincare_series(a, a - c + 1.0, -1.0 / x);
    let (s2, e2) = poincare_series(c - a, 1.0 - a, 1.0 / x);

    let gamma_c_over_cma = recip_gamma(c - a);
    let gamma_c_over_a = recip_gamma(a);
    // Gamma(c) multiplies both branches.
    let gc = super::gamma::gamma_complex(c).unwrap_or(Complex64::new(f64::NAN, 0.0));

    let branch1 = phase * x.powc(-a) * gamma_c_over_cma * s1;
    let branch2 = x.exp() * x.powc(a - c) * gamma_c_over_a * s2;
    let value = gc * (branch1 + branch2);
    let err = gc.norm()
        * (e1 * (x.powc(-a) * gamma_c_over_cma).norm()
            + e2 * (x.exp() * x.powc(a - c) * gamma_c_over_a).norm());
    (value, err)
}

/// Large-|x| value of Psi (the recessive x^{-a} series alone).
pub fn psi_asymptotic_value(a: Complex64, c: Complex64, x: Complex64) -> (Complex64, f64) {
    let (s, e) = poincare_series(a, a - c + 1.0, -1.0 / x);
    let pref = x.powc(-a);
    (pref * s, e * pref.norm())
}

/// The x^{-a} (non-exponential) branch of Phi at large |x|, with its
/// Gamma-weighted prefactor, optimally truncated. The conjugate-pairing
/// identity f = branch + conj(branch) for real solutions rests on this.
pub fn phi_recessive_value(a: Complex64, c: Complex64, x: Complex64) -> Result<(Complex64, f64)> {
    let sign = if x.im >= 0.0 { 1.0 } else { -1.0 };
    let phase = (Complex64::i() * std::f64::consts::PI * a * sign).exp();
    let (s, e) = poincare_series(a, a - c + 1.0, -1.0 / x);
    let pref = phase * x.powc(-a) * super::gamma::gamma_complex(c)? * recip_gamma(c - a);
    Ok((pref * s, e * pref.norm()))
}

/// One branch of the large-argument structure of Phi along a fixed ray.
///
/// Evaluation at radius rho means x = rho * direction; `expansion`
/// carries the Gamma-weighted prefactor and the first 1/rho correction.
#[derive(Debug, Clone)]
pub struct BranchTerm {
    /// x is raised to this power.
    pub power: Complex64,
    /// Whether the branch carries the e^x factor.
    pub exponential: bool,
    pub expansion: AsymptoticExpansion,
}

impl BranchTerm {
    pub fn eval(&self, direction: Complex64, rho: f64) -> Complex64 {
        let x = direction * rho;
        let mut v = self.expansion.eval(rho) * x.powc(self.power);
        if self.exponential {
            v *= x.exp();
        }
        v
    }
}

/// Structured large-argument expansion of Phi along the ray `direction`.
#[derive(Debug, Clone)]
pub struct PhiLargeX {
    pub direction: Complex64,
    /// x^{-a} branch.
    pub recessive: BranchTerm,
    /// e^x x^{a-c} branch.
    pub dominant: BranchTerm,
}

impl PhiLargeX {
    pub fn eval(&self, rho: f64) -> Complex64 {
        self.recessive.eval(self.direction, rho) + self.dominant.eval(self.direction, rho)
    }
}

/// Build the two-branch expansion of Phi(a, c, x) for x = rho*direction,
/// rho >= rho_min. Fails when the optimally truncated remainder at
/// rho_min cannot reach `tol` relative to the branch scale.
pub fn phi_large_x(
    a: Complex64,
    c: Complex64,
    direction: Complex64,
    rho_min: f64,
    tol: f64,
) -> Result<PhiLargeX> {
    let direction = direction / direction.norm();
    let x0 = direction * rho_min;
    let gc = super::gamma::gamma_complex(c)?;
    let sign = if direction.im >= 0.0 { 1.0 } else { -1.0 };
    let phase = (Complex64::i() * std::f64::consts::PI * a * sign).exp();

    let (_, e1) = poincare_series(a, a - c + 1.0, -1.0 / x0);
    let (_, e2) = poincare_series(c - a, 1.0 - a, 1.0 / x0);
    let worst = e1.max(e2);
    if worst > tol {
        return Err(Error::InsufficientDecay(format!(
            "remainder {worst:e} exceeds tolerance {tol:e} at |x| = {rho_min}"
        )));
    }

    // First-order 1/x coefficients of the two series, folded into 1/rho
    // along the ray: term1/term0 = -a(a-c+1)/x and (c-a)(1-a)/x.
    let rec_corr = -a * (a - c + 1.0) / direction;
    let dom_corr = (c - a) * (1.0 - a) / direction;
    // Second-order coefficients bound the 1/rho^2 error.
    let rec_t2 = (a * (a + 1.0) * (a - c + 1.0) * (a - c + 2.0) / 2.0).norm();
    let dom_t2 = ((c - a) * (c - a + 1.0) * (1.0 - a) * (2.0 - a) / 2.0).norm();

    let rec_pref = phase * gc * recip_gamma(c - a);
    let dom_pref = gc * recip_gamma(a);

    Ok(PhiLargeX {
        direction,
        recessive: BranchTerm {
            power: -a,
            exponential: false,
            expansion: AsymptoticExpansion {
                leading: rec_pref,
                correction_1_over_r: rec_corr,
                remainder_bound: 2.0 * rec_t2 * rec_pref.norm(),
            },
        },
        dominant: BranchTerm {
            power: a - c,
            exponential: true,
            expansion: AsymptoticExpansion {
                leading: dom_pref,
                correction_1_over_r: dom_corr,
                remainder_bound: 2.0 * dom_t2 * dom_pref.norm(),
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DdComplex;

    // Plain 200-term double-double Taylor sum: no switching logic, no
    // stop rule. Independent of the implementation path it referees.
    fn phi_taylor_oracle(a: Complex64, c: Complex64, x: Complex64) -> Complex64 {
        let a_dd = DdComplex::from_c64(a);
        let c_dd = DdComplex::from_c64(c);
        let x_dd = DdComplex::from_c64(x);
        let mut term = DdComplex::ONE;
        let mut sum = DdComplex::ONE;
        for n in 0..200 {
            let nf = n as f64;
            term = term
                .mul(a_dd.add_f64_re(nf))
                .mul(x_dd)
                .div(c_dd.add_f64_re(nf).mul_f64(nf + 1.0));
            sum = sum.add(term);
        }
        sum.to_c64()
    }

    #[test]
    fn phi_at_zero_is_one() {
        let v = kummer_phi(
            Complex64::new(0.3, 1.1),
            Complex64::new(2.7, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn phi_a_equals_c_is_exp() {
        let x = Complex64::new(2.0, 1.0);
        let v = kummer_phi(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), x).unwrap();
        assert!((v - x.exp()).norm() < 1e-13 * x.exp().norm());
    }

    #[test]
    fn phi_against_taylor_oracle() {
        let a = Complex64::new(0.3, 0.4);
        let c = Complex64::new(2.1, 0.0);
        let x = Complex64::new(0.0, 5.0);
        let want = phi_taylor_oracle(a, c, x);
        let got = kummer_phi(a, c, x).unwrap();
        assert!(
            (got - want).norm() < 1e-12 * want.norm(),
            "got {got}, oracle {want}"
        );
    }

    #[test]
    fn dd_series_region_against_oracle() {
        // |x| = 22 sits in the cancellation zone that forces dd summation.
        let a = Complex64::new(1.9, 0.7);
        let c = Complex64::new(4.87, 0.0);
        let x = Complex64::new(0.0, 22.0);
        let want = phi_taylor_oracle(a, c, x);
        let got = kummer_phi(a, c, x).unwrap();
        assert!(
            (got - want).norm() < 1e-11 * want.norm(),
            "got {got}, oracle {want}, rel {:e}",
            (got - want).norm() / want.norm()
        );
    }

    #[test]
    fn series_asymptotic_overlap() {
        // On the switch annulus both regimes must agree within their
        // combined error budgets.
        let a = Complex64::new(1.94, 0.75);
        let c = Complex64::new(4.87, 0.0);
        for rho in [28.0, 30.0, 32.0, 36.0] {
            let x = Complex64::new(0.0, rho);
            let series = series_dd(a, c, x).unwrap();
            let (asym, err) = phi_asymptotic_value(a, c, x);
            let budget = err + 1e-11 * series.norm();
            assert!(
                (series - asym).norm() <= budget.max(1e-12 * series.norm()),
                "rho={rho}: series {series}, asym {asym}, err {err:e}"
            );
        }
    }

    #[test]
    fn asymptotic_value_matches_direct_series_at_40() {
        // Full optimally-truncated expansion against the dd Taylor sum in
        // the overlap window.
        let a = Complex64::new(0.3, 0.4);
        let c = Complex64::new(2.1, 0.0);
        let x = Complex64::new(0.0, 40.0);
        let direct = series_dd(a, c, x).unwrap();
        let (via_asym, _) = phi_asymptotic_value(a, c, x);
        assert!(
            (direct - via_asym).norm() < 1e-9 * direct.norm(),
            "direct {direct}, asymptotic {via_asym}, rel {:e}",
            (direct - via_asym).norm() / direct.norm()
        );
    }

    #[test]
    fn large_x_expansion_within_stated_remainder() {
        let a = Complex64::new(0.3, 0.4);
        let c = Complex64::new(2.1, 0.0);
        let dir = Complex64::i();
        let exp = phi_large_x(a, c, dir, 35.0, 1e-9).unwrap();
        for rho in [35.0, 60.0, 120.0] {
            let truth = kummer_phi(a, c, dir * rho).unwrap();
            let via_exp = exp.eval(rho);
            let bound = exp.recessive.expansion.error_bound(rho)
                + exp.dominant.expansion.error_bound(rho);
            assert!(
                (truth - via_exp).norm() <= bound,
                "rho={rho}: |diff| {:e} > bound {bound:e}",
                (truth - via_exp).norm()
            );
        }
    }

    #[test]
    fn large_x_expansion_a_equals_c_degenerates_to_exp() {
        let a = Complex64::new(1.3, 0.0);
        let exp = phi_large_x(a, a, Complex64::i(), 35.0, 1e-9).unwrap();
        // Recessive branch carries 1/Gamma(0) = 0.
        assert_eq!(exp.recessive.expansion.leading, Complex64::new(0.0, 0.0));
        assert!((exp.dominant.expansion.leading - 1.0).norm() < 1e-13);
        assert!(exp.dominant.expansion.correction_1_over_r.norm() < 1e-13);
        let rho = 50.0;
        let want = (Complex64::i() * rho).exp();
        assert!((exp.eval(rho) - want).norm() < 1e-10 * want.norm());
    }

    #[test]
    fn two_branch_structure_present_for_generic_a() {
        let exp = phi_large_x(
            Complex64::new(0.7, 0.3),
            Complex64::new(2.4, 0.0),
            Complex64::i(),
            35.0,
            1e-8,
        )
        .unwrap();
        assert!(exp.recessive.expansion.leading.norm() > 0.0);
        assert!(exp.dominant.expansion.leading.norm() > 0.0);
        assert!(exp.dominant.exponential && !exp.recessive.exponential);
    }

    #[test]
    fn degenerate_c_rejected() {
        assert!(kummer_phi(
            Complex64::new(0.5, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0)
        )
        .is_err());
    }
}
