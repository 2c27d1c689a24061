//! Quadrature building blocks: Gauss-Legendre panels, composite Simpson
//! on tabulated data, Filon-type oscillatory integration, cumulative
//! trapezoid on arbitrary grids, and polynomial extrapolation to zero.

use num_complex::Complex64;

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
pub const GL16_NODES: [f64; 16] = [
    -0.989_400_934_991_649_9,
    -0.944_575_023_073_232_6,
    -0.865_631_202_387_831_7,
    -0.755_404_408_355_003_0,
    -0.617_876_244_402_643_7,
    -0.458_016_777_657_227_4,
    -0.281_603_550_779_258_9,
    -0.095_012_509_837_637_44,
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
pub const GL16_WEIGHTS: [f64; 16] = [
    0.027_152_459_411_754_094,
    0.062_253_523_938_647_89,
    0.095_158_511_682_492_78,
    0.124_628_971_255_533_87,
    0.149_595_988_816_576_73,
    0.169_156_519_395_002_54,
    0.182_603_415_044_923_59,
    0.189_450_610_455_068_5,
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_59,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_094,
];

/// 16-point Gauss-Legendre on [a, b].
pub fn gl16<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
        acc += *w * f(mid + half * x);
    }
    acc * half
}

/// Composite 16-point panels; `n_panels` equal panels over [a, b].
pub fn gl16_panels<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, n_panels: usize) -> Complex64 {
    let n = n_panels.max(1);
    let w = (b - a) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        acc += gl16(&mut f, a + j as f64 * w, a + (j + 1) as f64 * w);
    }
    acc
}

/// Panel count so a phase omega*(b-a) advances at most ~4 radians per
/// panel, where 16-point Gauss stays at full accuracy.
pub fn oscillation_panels(a: f64, b: f64, max_freq: f64, min_panels: usize) -> usize {
    let phase = (b - a).abs() * max_freq.abs();
    ((phase / 4.0).ceil() as usize).max(min_panels)
}

/// Composite Simpson over uniformly tabulated complex samples.
/// Falls back to a trapezoid correction on the last interval when the
/// sample count is even.
pub fn simpson_uniform(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    if n == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let odd_intervals = (n - 1) % 2 == 1;
    let last_simpson = if odd_intervals { n - 2 } else { n - 1 };
    let mut acc = values[0] + values[last_simpson];
    let mut j = 1;
    while j < last_simpson {
        acc += 4.0 * values[j];
        if j + 1 < last_simpson {
            acc += 2.0 * values[j + 1];
        }
        j += 2;
    }
    let mut out = acc * (h / 3.0);
    if odd_intervals {
        out += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    out
}

/// Cumulative trapezoid of tabulated samples on an arbitrary ordered
/// grid; output[i] = integral from points[0] to points[i].
pub fn cumulative_trapezoid(points: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(acc);
    for i in 1..points.len() {
        acc += 0.5 * (points[i] - points[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

fn filon_coeffs(theta: f64) -> (f64, f64, f64) {
    if theta.abs() < 1.0 / 6.0 {
        let t2 = theta * theta;
        let alpha = theta * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0));
        let beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0));
        let gamma = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0));
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = 1.0 / theta + s * c / t2 - 2.0 * s * s / t3;
        let beta = 2.0 * ((1.0 + c * c) / t2 - 2.0 * s * c / t3);
        let gamma = 4.0 * (s / t3 - c / t2);
        (alpha, beta, gamma)
    }
}

/// Filon quadrature of integral f(x) e^{i omega x} dx over a uniform
/// tabulation of the slowly varying amplitude f. Requires an odd number
/// of samples (even interval count). The oscillation e^{i omega x} is
/// integrated exactly against a piecewise parabola through f.
pub fn filon_uniform(f: &[Complex64], x0: f64, h: f64, omega: f64) -> Complex64 {
    let n = f.len();
    assert!(n >= 3 && n % 2 == 1, "filon needs an odd sample count");
    let theta = omega * h;
    let (alpha, beta, gamma) = filon_coeffs(theta);
    let i = Complex64::i();
    let e = |j: usize| (i * omega * (x0 + j as f64 * h)).exp();

    let mut s_even = 0.5 * (f[0] * e(0) + f[n - 1] * e(n - 1));
    let mut j = 2;
    while j < n - 1 {
        s_even += f[j] * e(j);
        j += 2;
    }
    let mut s_odd = Complex64::new(0.0, 0.0);
    let mut j = 1;
    while j < n {
        s_odd += f[j] * e(j);
        j += 2;
    }
    h * (-i * alpha * (f[n - 1] * e(n - 1) - f[0] * e(0)) + beta * s_even + gamma * s_odd)
}

/// Neville extrapolation of samples (x_i, y_i) to x = 0; the x_i must be
/// distinct. Returns the extrapolated value and an error estimate from
/// the last correction.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len();
    assert!(n >= 1 && n == ys.len());
    let mut tab = ys.to_vec();
    let mut last = tab[0];
    for level in 1..n {
        for i in 0..n - level {
            let num = xs[i] * tab[i + 1] - xs[i + level] * tab[i];
            tab[i] = num / (xs[i] - xs[i + level]);
        }
        last = tab[0];
    }
    let err = if n >= 2 { (last - ys[n - 1]).norm().min((last - tab[1.min(n - 1)]).norm()) } else { 0.0 };
    (last, err)
}
