//! Closed-form solutions of the radial Dirac system with the pure
//! Coulomb potential v = -A/r: the regular solution (~ r^gamma at the
//! origin), the irregular one (~ r^-gamma), and the fundamental matrix
//! built from the pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{
    gamma_complex, kummer_phi, phi_recessive_value, psi_asymptotic_value, tricomi_psi,
    AsymptoticExpansion,
};

/// The physical triple (m, k, A); defines one scattering problem
/// together with a short-range perturbation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SystemParams {
    pub mass: f64,
    pub angular: f64,
    pub coulomb_strength: f64,
}

impl SystemParams {
    /// Requires m > 0, k != 0 and |k| > |A|. A = 0 is admitted; the
    /// closed-form Coulomb operations below additionally require A != 0.
    pub fn new(mass: f64, angular: f64, coulomb_strength: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::validation("system.mass", "mass must be positive"));
        }
        if angular == 0.0 {
            return Err(Error::validation(
                "system.angular",
                "angular parameter k must be nonzero",
            ));
        }
        if angular.abs() <= coulomb_strength.abs() {
            return Err(Error::validation(
                "system.coulomb_strength",
                "|k| > |A| is required",
            ));
        }
        Ok(SystemParams {
            mass,
            angular,
            coulomb_strength,
        })
    }

    pub fn gamma(&self) -> f64 {
        (self.angular * self.angular - self.coulomb_strength * self.coulomb_strength).sqrt()
    }
}

/// Which half of the continuous spectrum the energy sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralCase {
    /// lambda > m
    Positive,
    /// lambda < -m
    Negative,
}

impl SpectralCase {
    pub fn sign(&self) -> f64 {
        match self {
            SpectralCase::Positive => 1.0,
            SpectralCase::Negative => -1.0,
        }
    }
}

/// One energy lambda with every derived quantity the formulas need.
///
/// Branch rules for the square roots: for lambda > m the root of m+lambda
/// is positive and sqrt(m-lambda) = i*sqrt(lambda-m); for lambda < -m the
/// root of m-lambda is positive and sqrt(m+lambda) = i*sqrt(-lambda-m).
/// Both choices make -i times the imaginary root positive.
#[derive(Debug, Clone, Copy)]
pub struct EnergyPoint {
    pub mass: f64,
    pub angular: f64,
    pub coulomb_strength: f64,
    pub lambda: f64,
    /// sqrt(lambda^2 - m^2) > 0, derived from lambda on construction.
    pub epsilon: f64,
    /// sqrt(k^2 - A^2) > 0.
    pub gamma: f64,
    /// (m - lambda)/epsilon.
    pub beta: f64,
    /// A*lambda/epsilon; the exponent of the Coulomb deviation phase.
    pub phi: f64,
    pub case_: SpectralCase,
    pub sqrt_m_plus_lambda: Complex64,
    pub sqrt_m_minus_lambda: Complex64,
}

pub const DEFAULT_GAP_FACTOR: f64 = 1e-3;

/// Build the derived energy data; rejects |lambda| <= m + delta_gap.
pub fn make_energy(params: &SystemParams, lambda: f64) -> Result<EnergyPoint> {
    make_energy_with_gap(params, lambda, DEFAULT_GAP_FACTOR * params.mass)
}

pub fn make_energy_with_gap(
    params: &SystemParams,
    lambda: f64,
    delta_gap: f64,
) -> Result<EnergyPoint> {
    let m = params.mass;
    if lambda.abs() <= m + delta_gap {
        return Err(Error::SpectralGap {
            lambda,
            threshold: m + delta_gap,
        });
    }
    let epsilon = (lambda * lambda - m * m).sqrt();
    let case_ = if lambda > 0.0 {
        SpectralCase::Positive
    } else {
        SpectralCase::Negative
    };
    let (sqrt_m_plus_lambda, sqrt_m_minus_lambda) = match case_ {
        SpectralCase::Positive => (
            Complex64::new((m + lambda).sqrt(), 0.0),
            Complex64::new(0.0, (lambda - m).sqrt()),
        ),
        SpectralCase::Negative => (
            Complex64::new(0.0, (-lambda - m).sqrt()),
            Complex64::new((m - lambda).sqrt(), 0.0),
        ),
    };
    Ok(EnergyPoint {
        mass: m,
        angular: params.angular,
        coulomb_strength: params.coulomb_strength,
        lambda,
        epsilon,
        gamma: params.gamma(),
        beta: (m - lambda) / epsilon,
        phi: params.coulomb_strength * lambda / epsilon,
        case_,
        sqrt_m_plus_lambda,
        sqrt_m_minus_lambda,
    })
}

impl EnergyPoint {
    /// Energy data of the reference problem (k = 0, A = 0); used by the
    /// free eigenfunctions and the momentum-representation bookkeeping.
    pub fn free(mass: f64, lambda: f64) -> Result<EnergyPoint> {
        let m = mass;
        if lambda.abs() <= m * (1.0 + DEFAULT_GAP_FACTOR) {
            return Err(Error::SpectralGap {
                lambda,
                threshold: m * (1.0 + DEFAULT_GAP_FACTOR),
            });
        }
        let helper = SystemParams {
            mass,
            angular: 1.0,
            coulomb_strength: 0.0,
        };
        let mut ep = make_energy_with_gap(&helper, lambda, DEFAULT_GAP_FACTOR * m)?;
        ep.angular = 0.0;
        ep.gamma = 0.0;
        ep.phi = 0.0;
        ep.coulomb_strength = 0.0;
        Ok(ep)
    }

    /// First-kind Kummer parameter gamma + i A lambda / epsilon. The sign
    /// of the imaginary part is the unique choice under which the closed
    /// forms solve the system; a selection test asserts that.
    pub fn kummer_a(&self) -> Complex64 {
        Complex64::new(self.gamma, self.phi)
    }

    pub fn kummer_c(&self) -> Complex64 {
        Complex64::new(2.0 * self.gamma + 1.0, 0.0)
    }

    /// 2 i epsilon r, the confluent argument.
    pub fn x_of_r(&self, r: f64) -> Complex64 {
        Complex64::new(0.0, 2.0 * self.epsilon * r)
    }
}

/// Two-component spinor value at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub f: Complex64,
    pub g: Complex64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor {
        f: Complex64::new(0.0, 0.0),
        g: Complex64::new(0.0, 0.0),
    };

    pub fn new(f: Complex64, g: Complex64) -> Self {
        Spinor { f, g }
    }

    pub fn scale(&self, c: Complex64) -> Spinor {
        Spinor {
            f: self.f * c,
            g: self.g * c,
        }
    }

    pub fn add(&self, other: &Spinor) -> Spinor {
        Spinor {
            f: self.f + other.f,
            g: self.g + other.g,
        }
    }

    pub fn sub(&self, other: &Spinor) -> Spinor {
        Spinor {
            f: self.f - other.f,
            g: self.g - other.g,
        }
    }

    pub fn conj(&self) -> Spinor {
        Spinor {
            f: self.f.conj(),
            g: self.g.conj(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.f.norm_sqr() + self.g.norm_sqr()).sqrt()
    }

    /// Wronskian-type bracket f1*g2 - g1*f2; constant in r for any two
    /// solutions because the system matrix is trace-free.
    pub fn wronskian(&self, other: &Spinor) -> Complex64 {
        self.f * other.g - self.g * other.f
    }
}

/// 2x2 complex matrix whose columns are the regular and irregular
/// solutions at one radius.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalMatrix {
    /// [[f0, phi0], [g0, psi0]]
    pub entries: [[Complex64; 2]; 2],
}

impl FundamentalMatrix {
    pub fn from_columns(regular: &Spinor, irregular: &Spinor) -> Self {
        FundamentalMatrix {
            entries: [[regular.f, irregular.f], [regular.g, irregular.g]],
        }
    }

    pub fn det(&self) -> Complex64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    /// Adjugate divided by the supplied determinant. Using the constant
    /// determinant instead of the local one keeps the inverse stable
    /// where the columns blow up as r^(+-gamma).
    pub fn inv_with_det(&self, det: Complex64) -> FundamentalMatrix {
        FundamentalMatrix {
            entries: [
                [self.entries[1][1] / det, -self.entries[0][1] / det],
                [-self.entries[1][0] / det, self.entries[0][0] / det],
            ],
        }
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.entries[0][0] * v[0] + self.entries[0][1] * v[1],
            self.entries[1][0] * v[0] + self.entries[1][1] * v[1],
        ]
    }

    pub fn mul_mat(&self, other: &FundamentalMatrix) -> FundamentalMatrix {
        let a = &self.entries;
        let b = &other.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        FundamentalMatrix { entries: out }
    }

    pub fn column(&self, j: usize) -> Spinor {
        Spinor {
            f: self.entries[0][j],
            g: self.entries[1][j],
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Combination coefficients and derived constants of the closed-form
/// pure-Coulomb pair at one energy.
#[derive(Debug, Clone)]
pub struct CoulombSystem {
    pub ep: EnergyPoint,
    /// Kummer coefficients of the regular solution.
    pub a1: Complex64,
    pub a2: Complex64,
    /// Small-r coefficient pair of the irregular solution (the pair the
    /// homogeneous relation constrains); b1 is pinned to 1 unless the
    /// relation degenerates on that pivot.
    pub b_small: (Complex64, Complex64),
    /// Tricomi combination coefficients producing exactly the small-r
    /// pair above: b_psi_j = b_small_j * Gamma(a+j-1) (2 i eps)^(2 gamma)
    /// / Gamma(2 gamma).
    pub b_psi: (Complex64, Complex64),
    /// r^gamma direction of the regular solution, f-component normalized
    /// to 1 (A != 0).
    pub dir_regular: [Complex64; 2],
}

/// Build the coefficient set at one energy. Requires A != 0; the
/// classical A = 0 fundamental system lives in the Riccati-Bessel
/// backend of the perturbation module.
pub fn coulomb_system(params: &SystemParams, ep: &EnergyPoint) -> Result<CoulombSystem> {
    let aa = params.coulomb_strength;
    if aa == 0.0 {
        return Err(Error::Unsupported(
            "closed-form Coulomb solutions need A != 0".into(),
        ));
    }
    let k = params.angular;
    let gamma = ep.gamma;
    let s = ep.sqrt_m_plus_lambda;
    let d = ep.sqrt_m_minus_lambda;

    // Regular direction r^gamma [1; b0], b0 = (gamma + k)/A.
    let b0 = Complex64::new((gamma + k) / aa, 0.0);
    let p0 = Complex64::new(1.0, 0.0);
    let q0 = b0;
    // f -> s (a1+a2) r^gamma and g -> -d (a1-a2) r^gamma as r -> 0.
    let sum = p0 / s;
    let diff = -q0 / d;
    let a1 = 0.5 * (sum + diff);
    let a2 = 0.5 * (sum - diff);

    // Irregular small-r pair from the homogeneous relation
    // (b2 + b1) s (k - gamma) = A (b2 - b1) d, pivot b1 = 1.
    let u = (k - gamma) * s + aa * d;
    let v = (k - gamma) * s - aa * d;
    let scale = u.norm().max(v.norm());
    let b_small = if v.norm() > 1e-12 * scale {
        (Complex64::new(1.0, 0.0), -u / v)
    } else if u.norm() > 1e-12 * scale {
        (-v / u, Complex64::new(1.0, 0.0))
    } else {
        return Err(Error::DegenerateScale(
            "both pivots of the small-r relation vanish".into(),
        ));
    };

    let a = ep.kummer_a();
    let g2g = gamma_complex(Complex64::new(2.0 * gamma, 0.0))?;
    let two_i_eps = Complex64::new(0.0, 2.0 * ep.epsilon);
    let pow = two_i_eps.powc(Complex64::new(2.0 * gamma, 0.0));
    let b_psi_1 = b_small.0 * gamma_complex(a)? * pow / g2g;
    let b_psi_2 = b_small.1 * gamma_complex(a + 1.0)? * pow / g2g;

    Ok(CoulombSystem {
        ep: *ep,
        a1,
        a2,
        b_small,
        b_psi: (b_psi_1, b_psi_2),
        dir_regular: [p0, q0],
    })
}

impl CoulombSystem {
    /// Regular solution F0(r) ~ r^gamma [1; b0], normalized with N = 1.
    pub fn regular(&self, r: f64) -> Result<Spinor> {
        self.regular_with_sign(r, 1.0)
    }

    /// Same construction with the sign of the imaginary Kummer-parameter
    /// part forced; only +1 solves the system (selection test).
    pub fn regular_with_sign(&self, r: f64, sign: f64) -> Result<Spinor> {
        let ep = &self.ep;
        let a = Complex64::new(ep.gamma, sign * ep.phi);
        let c = ep.kummer_c();
        let x = ep.x_of_r(r);
        let q1 = self.a1 * kummer_phi(a, c, x)?;
        let q2 = self.a2 * kummer_phi(a + 1.0, c, x)?;
        let envelope = (-Complex64::i() * ep.epsilon * r).exp() * r.powf(ep.gamma);
        Ok(Spinor {
            f: ep.sqrt_m_plus_lambda * envelope * (q1 + q2),
            g: -ep.sqrt_m_minus_lambda * envelope * (q1 - q2),
        })
    }

    /// Irregular solution G0(r) ~ r^-gamma at the origin, with the
    /// small-r coefficient pair in `b_small`.
    pub fn irregular(&self, r: f64) -> Result<Spinor> {
        let ep = &self.ep;
        let a = ep.kummer_a();
        let c = ep.kummer_c();
        let x = ep.x_of_r(r);
        let p1 = self.b_psi.0 * tricomi_psi(a, c, x)?;
        let p2 = self.b_psi.1 * tricomi_psi(a + 1.0, c, x)?;
        let envelope = (-Complex64::i() * ep.epsilon * r).exp() * r.powf(ep.gamma);
        Ok(Spinor {
            f: ep.sqrt_m_plus_lambda * envelope * (p1 + p2),
            g: -ep.sqrt_m_minus_lambda * envelope * (p1 - p2),
        })
    }

    pub fn fundamental_matrix(&self, r: f64) -> Result<FundamentalMatrix> {
        Ok(FundamentalMatrix::from_columns(
            &self.regular(r)?,
            &self.irregular(r)?,
        ))
    }

    /// The constant determinant of the fundamental matrix, evaluated at
    /// a radius where both columns are well scaled.
    pub fn det_constant(&self) -> Result<Complex64> {
        let r_ref = 1.0 / (1.0 + self.ep.epsilon);
        Ok(self.fundamental_matrix(r_ref)?.det())
    }

    /// Large-r envelopes of the requested solution, phase-compensated by
    /// e^{i eps r} (2 i eps r)^{i phi}. The leading amplitude and 1/r
    /// correction are fitted from exact evaluations; the fitted constant
    /// stands in for the closed-form amplitude.
    pub fn large_r(&self, which: WhichSolution) -> Result<SolutionAsymptotics> {
        let (r1, r2, r3) = (200.0, 400.0, 300.0);
        let eval = |r: f64| -> Result<(Complex64, Complex64)> {
            let comp = self.phase_compensator(r);
            let sp = match which {
                WhichSolution::Regular => self.incoming_envelope(r)?,
                WhichSolution::Irregular => self.irregular(r)?,
            };
            Ok((sp.f * comp, sp.g * comp))
        };
        let (f1, g1) = eval(r1)?;
        let (f2, g2) = eval(r2)?;
        let (f3, g3) = eval(r3)?;
        Ok(SolutionAsymptotics {
            f: fit_envelope(f1, f2, f3, r1, r2, r3)?,
            g: fit_envelope(g1, g2, g3, r1, r2, r3)?,
        })
    }

    /// e^{i eps r} (2 i eps r)^{i phi}, the compensator that freezes the
    /// incoming channel of either solution.
    pub fn phase_compensator(&self, r: f64) -> Complex64 {
        let ep = &self.ep;
        let x = ep.x_of_r(r);
        (Complex64::i() * ep.epsilon * r).exp() * x.powc(Complex64::new(0.0, ep.phi))
    }

    /// The complex envelope whose doubled real part is the regular
    /// solution: the recessive (x^-a) halves of both Kummer terms.
    pub fn incoming_envelope(&self, r: f64) -> Result<Spinor> {
        let ep = &self.ep;
        let a = ep.kummer_a();
        let c = ep.kummer_c();
        let x = ep.x_of_r(r);
        let (v1, _) = phi_recessive_value(a, c, x)?;
        let (v2, _) = phi_recessive_value(a + 1.0, c, x)?;
        let q1 = self.a1 * v1;
        let q2 = self.a2 * v2;
        let envelope = (-Complex64::i() * ep.epsilon * r).exp() * r.powf(ep.gamma);
        Ok(Spinor {
            f: ep.sqrt_m_plus_lambda * envelope * (q1 + q2),
            g: -ep.sqrt_m_minus_lambda * envelope * (q1 - q2),
        })
    }

    /// The irregular solution's leading Jost-type amplitude: phi0 ~
    /// jost_amplitude * sqrt(m+lambda) e^{-i eps r} (2 i eps r)^{-i phi}.
    pub fn jost_amplitude(&self) -> Complex64 {
        let two_i_eps = Complex64::new(0.0, 2.0 * self.ep.epsilon);
        self.b_psi.0 * two_i_eps.powc(Complex64::new(-self.ep.gamma, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichSolution {
    Regular,
    Irregular,
}

/// Compensated large-r envelopes of the two spinor components.
#[derive(Debug, Clone)]
pub struct SolutionAsymptotics {
    pub f: AsymptoticExpansion,
    pub g: AsymptoticExpansion,
}

fn fit_envelope(
    v1: Complex64,
    v2: Complex64,
    v3: Complex64,
    r1: f64,
    r2: f64,
    r3: f64,
) -> Result<AsymptoticExpansion> {
    if v1.norm() == 0.0 && v2.norm() == 0.0 {
        return Ok(AsymptoticExpansion {
            leading: Complex64::new(0.0, 0.0),
            correction_1_over_r: Complex64::new(0.0, 0.0),
            remainder_bound: 0.0,
        });
    }
    // Three-term model v = u0 + u1/r + u2/r^2; the quadratic term is
    // absorbed into the remainder bound so the fitted leading constant
    // does not carry an O(r^-2) bias.
    let x = [1.0 / r1, 1.0 / r2, 1.0 / r3];
    let v = [v1, v2, v3];
    let det = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| -> f64 {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let ones = [1.0, 1.0, 1.0];
    let xs = x;
    let x2 = [x[0] * x[0], x[1] * x[1], x[2] * x[2]];
    let d = det(ones, xs, x2);
    if d.abs() < 1e-18 {
        return Err(Error::Fit("degenerate envelope fit radii".into()));
    }
    let detc = |col: usize| -> Complex64 {
        let pick = |row: usize, j: usize| -> Complex64 {
            if j == col {
                v[row]
            } else {
                let cols = [ones, xs, x2];
                Complex64::new(cols[j][row], 0.0)
            }
        };
        pick(0, 0) * (pick(1, 1) * pick(2, 2) - pick(2, 1) * pick(1, 2))
            - pick(0, 1) * (pick(1, 0) * pick(2, 2) - pick(2, 0) * pick(1, 2))
            + pick(0, 2) * (pick(1, 0) * pick(2, 1) - pick(2, 0) * pick(1, 1))
    };
    let u0 = detc(0) / d;
    let u1 = detc(1) / d;
    let u2 = detc(2) / d;
    if u0.norm() < 1e-300 {
        return Err(Error::Fit("vanishing leading envelope".into()));
    }
    Ok(AsymptoticExpansion {
        leading: u0,
        correction_1_over_r: u1 / u0,
        remainder_bound: 2.0 * u2.norm(),
    })
}

/// Asymptotic value of the irregular solution via the Tricomi expansion;
/// used to seed inward integrations cheaply at large radii.
pub fn irregular_asymptotic(sys: &CoulombSystem, r: f64) -> Spinor {
    let ep = &sys.ep;
    let a = ep.kummer_a();
    let c = ep.kummer_c();
    let x = ep.x_of_r(r);
    let (psi1, _) = psi_asymptotic_value(a, c, x);
    let (psi2, _) = psi_asymptotic_value(a + 1.0, c, x);
    let p1 = sys.b_psi.0 * psi1;
    let p2 = sys.b_psi.1 * psi2;
    let envelope = (-Complex64::i() * ep.epsilon * r).exp() * r.powf(ep.gamma);
    Spinor {
        f: ep.sqrt_m_plus_lambda * envelope * (p1 + p2),
        g: -ep.sqrt_m_minus_lambda * envelope * (p1 - p2),
    }
}

/// System matrix of the first-order form dZ/dr = M(r) Z for
/// v(r) = -A/r + q(r).
pub fn system_matrix(params: &SystemParams, lambda: f64, r: f64, q: f64) -> [[f64; 2]; 2] {
    let v = -params.coulomb_strength / r + q;
    [
        [-params.angular / r, params.mass + lambda - v],
        [params.mass - lambda + v, params.angular / r],
    ]
}

/// Relative residual of dZ/dr = M(r) Z measured with a five-point
/// stencil on a closed-form evaluator.
pub fn ode_residual<F>(
    params: &SystemParams,
    lambda: f64,
    q_at: impl Fn(f64) -> f64,
    eval: F,
    r: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<Spinor>,
{
    let h = (0.004 * r).min(5e-3);
    let zm2 = eval(r - 2.0 * h)?;
    let zm1 = eval(r - h)?;
    let z0 = eval(r)?;
    let zp1 = eval(r + h)?;
    let zp2 = eval(r + 2.0 * h)?;
    let d = |m2: Complex64, m1: Complex64, p1: Complex64, p2: Complex64| {
        (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
    };
    let df = d(zm2.f, zm1.f, zp1.f, zp2.f);
    let dg = d(zm2.g, zm1.g, zp1.g, zp2.g);
    let m = system_matrix(params, lambda, r, q_at(r));
    let rf = df - (m[0][0] * z0.f + m[0][1] * z0.g);
    let rg = dg - (m[1][0] * z0.f + m[1][1] * z0.g);
    let scale = df.norm() + dg.norm() + z0.norm() * (m[0][0].abs() + m[0][1].abs() + m[1][1].abs());
    Ok((rf.norm() + rg.norm()) / scale.max(1e-300))
}
