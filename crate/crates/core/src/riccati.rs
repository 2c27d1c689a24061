//! Riccati-Bessel functions S_l(x) = x j_l(x) and C_l(x) = -x y_l(x)
//! for integer l >= 0. They furnish the unperturbed fundamental system
//! of the classical case A = 0, where the confluent second-kind
//! connection formula degenerates (integer lower parameter).

/// Spherical Bessel j_l by power series (small x) or upward recurrence.
fn spherical_j(l: usize, x: f64) -> f64 {
    if x.abs() < (2 * l + 4) as f64 {
        // Series x^l/(2l+1)!! * sum_m (-x^2/2)^m / (m! (2l+3)(2l+5)...(2l+2m+1))
        let mut dfact = 1.0;
        for j in 1..=l {
            dfact *= (2 * j + 1) as f64;
        }
        let mut term = x.powi(l as i32) / dfact;
        let mut sum = term;
        let x2 = -0.5 * x * x;
        for m in 1..200 {
            term *= x2 / (m as f64 * (2 * l + 2 * m + 1) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut jm = x.sin() / x;
        if l == 0 {
            return jm;
        }
        let mut j0 = x.sin() / (x * x) - x.cos() / x;
        for n in 1..l {
            let jp = (2 * n + 1) as f64 / x * j0 - jm;
            jm = j0;
            j0 = jp;
        }
        j0
    }
}

/// Spherical Bessel y_l; upward recurrence is stable for all x > 0.
fn spherical_y(l: usize, x: f64) -> f64 {
    let mut ym = -x.cos() / x;
    if l == 0 {
        return ym;
    }
    let mut y0 = -x.cos() / (x * x) - x.sin() / x;
    for n in 1..l {
        let yp = (2 * n + 1) as f64 / x * y0 - ym;
        ym = y0;
        y0 = yp;
    }
    y0
}

/// S_l(x) = x j_l(x); regular at the origin, ~ x^{l+1}/(2l+1)!!.
pub fn riccati_s(l: usize, x: f64) -> f64 {
    x * spherical_j(l, x)
}

/// C_l(x) = -x y_l(x); irregular, ~ (2l-1)!! x^{-l}.
pub fn riccati_c(l: usize, x: f64) -> f64 {
    -x * spherical_y(l, x)
}

/// d/dx S_l via S_l' = S_{l-1} - (l/x) S_l (S_0' = cos x).
pub fn riccati_s_deriv(l: usize, x: f64) -> f64 {
    if l == 0 {
        x.cos()
    } else {
        riccati_s(l - 1, x) - l as f64 / x * riccati_s(l, x)
    }
}

/// d/dx C_l via the same recurrence (C_0' = -sin x).
pub fn riccati_c_deriv(l: usize, x: f64) -> f64 {
    if l == 0 {
        -x.sin()
    } else {
        riccati_c(l - 1, x) - l as f64 / x * riccati_c(l, x)
    }
}
