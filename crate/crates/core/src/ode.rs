//! Runge-Kutta integration of the first-order radial system and
//! finite-difference weights on scattered nodes.

use num_complex::Complex64;

use crate::coulomb::{system_matrix, Spinor, SystemParams};
use crate::error::{Error, Result};

pub type State = [Complex64; 2];

/// The radial Dirac system dZ/dr = M(r) Z with v = -A/r + q(r).
pub struct DiracOde<'a> {
    pub params: SystemParams,
    pub lambda: f64,
    pub q: &'a dyn Fn(f64) -> f64,
}

impl<'a> DiracOde<'a> {
    pub fn deriv(&self, r: f64, z: &State) -> State {
        let m = system_matrix(&self.params, self.lambda, r, (self.q)(r));
        [
            m[0][0] * z[0] + m[0][1] * z[1],
            m[1][0] * z[0] + m[1][1] * z[1],
        ]
    }
}

fn add_scaled(z: &State, k: &State, c: f64) -> State {
    [z[0] + c * k[0], z[1] + c * k[1]]
}

// Cash-Karp embedded pair.
const CK_A: [f64; 5] = [1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0];
const CK_B: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_C5: [f64; 6] = [
    37.0 / 378.0,
    0.0,
    250.0 / 621.0,
    125.0 / 594.0,
    0.0,
    512.0 / 1771.0,
];
const CK_C4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

fn ck_step(ode: &DiracOde, r: f64, z: &State, h: f64) -> (State, f64) {
    let k1 = ode.deriv(r, z);
    let mut ks: Vec<State> = Vec::with_capacity(6);
    ks.push(k1);
    for i in 0..5 {
        let mut zi = *z;
        for (j, k) in ks.iter().enumerate() {
            zi = add_scaled(&zi, k, h * CK_B[i][j]);
        }
        ks.push(ode.deriv(r + CK_A[i] * h, &zi));
    }
    let mut z5 = *z;
    let mut z4 = *z;
    for (j, k) in ks.iter().enumerate() {
        z5 = add_scaled(&z5, k, h * CK_C5[j]);
        z4 = add_scaled(&z4, k, h * CK_C4[j]);
    }
    let err = ((z5[0] - z4[0]).norm_sqr() + (z5[1] - z4[1]).norm_sqr()).sqrt();
    (z5, err)
}

/// Adaptive Cash-Karp integration from (r0, seed) through the ordered
/// target radii (ascending when r0 < targets, descending otherwise).
/// Returns the state at every target.
pub fn integrate_to_targets(
    ode: &DiracOde,
    r0: f64,
    seed: State,
    targets: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut r = r0;
    let mut z = seed;
    let forward = targets.last().map(|&t| t >= r0).unwrap_or(true);
    let mut h: f64 = if forward { 1.0 } else { -1.0 } * (r0.abs() * 0.05).clamp(1e-8, 0.05);
    let mut steps = 0usize;
    for &target in targets {
        if (forward && target < r) || (!forward && target > r) {
            return Err(Error::Validation {
                path: "targets".into(),
                message: "targets must be ordered away from the seed".into(),
            });
        }
        while (forward && r < target) || (!forward && r > target) {
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::NonConvergence("step budget exhausted".into()));
            }
            let remaining = target - r;
            if h.abs() > remaining.abs() {
                h = remaining;
            }
            let (z_new, err) = ck_step(ode, r, &z, h);
            // Near the origin the components scale like r^(+-gamma), so
            // the control must stay relative; atol = 0 is the norm here.
            let scale = atol
                + rtol
                    * (z[0].norm_sqr() + z[1].norm_sqr())
                        .sqrt()
                        .max((z_new[0].norm_sqr() + z_new[1].norm_sqr()).sqrt());
            if err <= scale || h.abs() < 1e-13 * (1.0 + r.abs()) {
                r += h;
                z = z_new;
                let grow = if err > 0.0 {
                    0.9 * (scale / err).powf(0.2)
                } else {
                    5.0
                };
                h *= grow.clamp(0.2, 5.0);
            } else {
                h *= (0.9 * (scale / err).powf(0.25)).clamp(0.1, 1.0);
            }
            let cap = 0.02 + 0.3 * r.abs();
            if h.abs() > cap {
                h = cap * h.signum();
            }
        }
        out.push(z);
    }
    Ok(out)
}

/// Classic RK4 sweep that lands exactly on every grid point. Substeps
/// are capped by h_max and, near the origin, by a fraction of the local
/// radius so the 1/r coefficients stay resolved (geometric stepping).
pub fn rk4_sweep_grid(
    ode: &DiracOde,
    seed_r: f64,
    seed: State,
    grid: &[f64],
    h_max: f64,
) -> Vec<State> {
    let mut out = Vec::with_capacity(grid.len());
    let mut r = seed_r;
    let mut z = seed;
    for &target in grid {
        let dir = (target - r).signum();
        while (target - r) * dir > 0.0 {
            let local = h_max.min(0.01 * r.abs()).max(1e-9);
            let h = local.min((target - r).abs()) * dir;
            z = rk4_step(ode, r, &z, h);
            r += h;
        }
        r = target;
        out.push(z);
    }
    out
}

fn rk4_step(ode: &DiracOde, r: f64, z: &State, h: f64) -> State {
    let k1 = ode.deriv(r, z);
    let k2 = ode.deriv(r + 0.5 * h, &add_scaled(z, &k1, 0.5 * h));
    let k3 = ode.deriv(r + 0.5 * h, &add_scaled(z, &k2, 0.5 * h));
    let k4 = ode.deriv(r + h, &add_scaled(z, &k3, h));
    [
        z[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        z[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Fornberg finite-difference weights for the m-th derivative at x0 on
/// arbitrary nodes.
pub fn fd_weights(nodes: &[f64], x0: f64, order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mi = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mi).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mi).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Relative residual of the system on tabulated values, using 7-point
/// Fornberg derivatives on the natural (possibly non-uniform) stencil.
pub fn tabulated_residual(
    params: &SystemParams,
    lambda: f64,
    q: &dyn Fn(f64) -> f64,
    radii: &[f64],
    values: &[Spinor],
    index: usize,
) -> f64 {
    let half = 3usize;
    let lo = index.saturating_sub(half).min(radii.len() - 7);
    let nodes = &radii[lo..lo + 7];
    let w = fd_weights(nodes, radii[index], 1);
    let mut df = Complex64::new(0.0, 0.0);
    let mut dg = Complex64::new(0.0, 0.0);
    for (j, &wj) in w.iter().enumerate() {
        df += wj * values[lo + j].f;
        dg += wj * values[lo + j].g;
    }
    let r = radii[index];
    let m = system_matrix(params, lambda, r, q(r));
    let z = values[index];
    let rf = df - (m[0][0] * z.f + m[0][1] * z.g);
    let rg = dg - (m[1][0] * z.f + m[1][1] * z.g);
    let scale =
        df.norm() + dg.norm() + z.norm() * (m[0][0].abs() + m[0][1].abs() + m[1][1].abs());
    (rf.norm() + rg.norm()) / scale.max(1e-300)
}
