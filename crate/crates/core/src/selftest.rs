//! The acceptance suite: every verification gate of the artifact, each
//! pinned to its tolerance, runnable from the CLI (`selftest`) and from
//! the integration tests. One criterion = one function = one line of
//! output.

use num_complex::Complex64;

use crate::coulomb::{
    coulomb_system, make_energy, ode_residual, EnergyPoint, Spinor, SystemParams,
};
use crate::dynamics::{
    deviation_identities, distributional_fourier_closed, distributional_fourier_quadrature,
    free_case_identities, run_probe, DynamicsConfig,
};
use crate::error::Result;
use crate::perturb::{picard_grid, rk_jost, rk_regular, solve_pair, PerturbationSpec};
use crate::runner::map_lambda_grid;
use crate::scatter::{extract_coefficients, StationaryDeviation};
use crate::specfun::{gamma_complex, kummer_phi, tricomi_psi};
use crate::spectral::{
    rho1, u0_forward, u0_inverse, DifferentialExpression, Packet, PerturbedBasis, SpectralNodes,
};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2}: {:<28} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn flagship() -> (SystemParams, PerturbationSpec) {
    (
        SystemParams::new(1.0, 2.0, 0.5).unwrap(),
        PerturbationSpec::exp_decay(0.3, 1.0),
    )
}

const FLAGSHIP_GRID: [f64; 8] = [1.2, 1.5, 2.0, 3.0, -1.2, -1.5, -2.0, -3.0];

fn timed<F: FnOnce() -> Result<(bool, String)>>(
    id: usize,
    name: &'static str,
    f: F,
) -> CriterionResult {
    let start = std::time::Instant::now();
    let (passed, detail) = match f() {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// 1: special-function identities and ODE residuals.
pub fn criterion_1_specfun() -> CriterionResult {
    timed(1, "special functions", || {
        let mut worst_id = 0.0f64;
        // Kummer transformation on 100 seeded triples.
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let a = Complex64::new(4.0 * next() - 2.0, 4.0 * next() - 2.0);
            let c = Complex64::new(1.2 + 4.0 * next(), 2.0 * next() - 1.0);
            let x = Complex64::new(40.0 * next() - 20.0, 40.0 * next() - 20.0);
            let x = x / x.norm() * (next() * 20.0);
            let lhs = kummer_phi(a, c, x)?;
            let rhs = x.exp() * kummer_phi(c - a, c, -x)?;
            worst_id = worst_id.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-30));
        }
        // Gamma reflection.
        for _ in 0..100 {
            let z = Complex64::new(8.0 * next() - 4.0, 8.0 * next() - 4.0);
            if z.im.abs() < 0.05 && (z.re - z.re.round()).abs() < 0.05 {
                continue;
            }
            let refl = gamma_complex(z)? * gamma_complex(Complex64::new(1.0, 0.0) - z)?
                * (std::f64::consts::PI * z).sin()
                / std::f64::consts::PI;
            worst_id = worst_id.max((refl - 1.0).norm());
        }
        // Product identity at phi = 0.7.
        let phi = 0.7;
        let prod = gamma_complex(Complex64::new(1.0, phi))?
            * gamma_complex(Complex64::new(0.0, -phi))?;
        let want = Complex64::new(0.0, std::f64::consts::PI / (std::f64::consts::PI * phi).sinh());
        worst_id = worst_id.max((prod - want).norm() / want.norm());

        // Confluent ODE residuals on a five-point stencil.
        let mut worst_ode = 0.0f64;
        let cases = [
            (Complex64::new(1.94, 0.75), Complex64::new(4.873, 0.0), 6.0),
            (Complex64::new(1.94, 0.75), Complex64::new(4.873, 0.0), 18.0),
            (Complex64::new(0.3, 0.4), Complex64::new(2.1, 0.0), 45.0),
        ];
        for (a, c, rho) in cases {
            let x = Complex64::new(0.0, rho);
            worst_ode = worst_ode.max(confluent_residual(|z| kummer_phi(a, c, z), a, c, x)?);
            worst_ode = worst_ode.max(confluent_residual(|z| tricomi_psi(a, c, z), a, c, x)?);
        }
        let pass = worst_id <= 1e-10 && worst_ode <= 1e-7;
        Ok((
            pass,
            format!("identities {worst_id:.2e} (<=1e-10), ODE residual {worst_ode:.2e} (<=1e-7)"),
        ))
    })
}

fn confluent_residual<F>(f: F, a: Complex64, c: Complex64, x: Complex64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let dir = x / x.norm();
    let h = 0.05;
    let step = dir * h;
    let ym2 = f(x - 2.0 * step)?;
    let ym1 = f(x - step)?;
    let y0 = f(x)?;
    let yp1 = f(x + step)?;
    let yp2 = f(x + 2.0 * step)?;
    let d1 = (ym2 - 8.0 * ym1 + 8.0 * yp1 - yp2) / (12.0 * step);
    let d2 = (-ym2 + 16.0 * ym1 - 30.0 * y0 + 16.0 * yp1 - yp2) / (12.0 * step * step);
    let lhs = x * d2 + (c - x) * d1 - a * y0;
    let scale = (x * d2).norm() + ((c - x) * d1).norm() + (a * y0).norm();
    Ok(lhs.norm() / scale.max(1e-300))
}

/// 2: pure-Coulomb structure.
pub fn criterion_2_coulomb() -> CriterionResult {
    timed(2, "pure-Coulomb structure", || {
        let (params, _) = flagship();
        let mut worst_det = 0.0f64;
        let mut worst_exp = 0.0f64;
        let mut worst_ode = 0.0f64;
        for lambda in [1.5, -2.0] {
            let ep = make_energy(&params, lambda)?;
            let sys = coulomb_system(&params, &ep)?;
            let d_ref = sys.det_constant()?;
            for r in [1e-3, 0.5, 20.0, 1e3] {
                let d = sys.fundamental_matrix(r)?.det();
                worst_det = worst_det.max((d - d_ref).norm() / d_ref.norm());
            }
            let reg = sys.regular(1e-4)?.norm() / sys.regular(1e-3)?.norm();
            worst_exp = worst_exp.max((reg * 10f64.powf(ep.gamma) - 1.0).abs());
            let irr = sys.irregular(1e-4)?.norm() / sys.irregular(1e-3)?.norm();
            worst_exp = worst_exp.max((irr / 10f64.powf(ep.gamma) - 1.0).abs());
            for r in [0.05, 0.5, 3.0, 15.0] {
                worst_ode =
                    worst_ode.max(ode_residual(&params, lambda, |_| 0.0, |rr| sys.regular(rr), r)?);
            }
        }
        let pass = worst_det <= 1e-8 && worst_exp <= 1e-2 && worst_ode <= 1e-7;
        Ok((
            pass,
            format!(
                "det drift {worst_det:.2e} (<=1e-8), exponents {worst_exp:.2e} (<=1e-2), ODE {worst_ode:.2e} (<=1e-7)"
            ),
        ))
    })
}

/// 3: perturbed solutions against the independent integrator.
pub fn criterion_3_perturbed() -> CriterionResult {
    timed(3, "perturbed solutions", || {
        let (params, q) = flagship();
        let ep = make_energy(&params, 1.5)?;
        let pair = solve_pair(&params, &ep, &q)?;

        let i10 = pair.regular.nearest_index(10.0);
        let r10 = pair.regular.radii[i10];
        let rk = rk_regular(&params, &ep, &q, &[r10])?;
        let cross_reg = pair.regular.values[i10].sub(&rk[0]).norm() / rk[0].norm();
        let rkj = rk_jost(&params, &ep, &q, &[r10])?;
        let cross_jost = pair.jost.values[i10].sub(&rkj[0]).norm() / rkj[0].norm();

        // Small-r asymptote, extrapolated linearly in r to zero.
        let b0 = (ep.gamma + params.angular) / params.coulomb_strength;
        let probe = |target: f64| {
            let i = pair.regular.nearest_index(target);
            let r = pair.regular.radii[i];
            let z = pair.regular.values[i];
            let sc = r.powf(ep.gamma);
            (r, z.f / sc, z.g / sc)
        };
        let (r1, f1, g1) = probe(2e-4);
        let (r2, f2, g2) = probe(1e-4);
        let lim_f = (f1 * r2 - f2 * r1) / (r2 - r1);
        let lim_g = (g1 * r2 - g2 * r1) / (r2 - r1);
        let small_r = (lim_f - 1.0).norm().max((lim_g - b0).norm() / b0);

        // Jost boundary against the unperturbed reference at half the
        // truncation radius, plus the envelope modulus at r = 200.
        let r_half = pair.r_infinity / 2.0;
        let i = pair.jost.nearest_index(r_half);
        let reference = pair.backend.jost_reference(pair.jost.radii[i])?;
        let boundary = pair.jost.values[i].sub(&reference).norm() / reference.norm();
        let envelope = (pair.backend.jost_reference(200.0)?.f.norm()
            / ep.sqrt_m_plus_lambda.norm()
            - 1.0)
            .abs();

        let pass = cross_reg <= 1e-6
            && cross_jost <= 1e-6
            && small_r <= 1e-4
            && boundary <= 1e-3
            && envelope <= 1e-3;
        Ok((
            pass,
            format!(
                "cross-val {:.2e} (<=1e-6), small-r {small_r:.2e} (<=1e-4), boundary {boundary:.2e} / envelope {envelope:.2e} (<=1e-3)",
                cross_reg.max(cross_jost)
            ),
        ))
    })
}

/// 4: scattering structure.
pub fn criterion_4_scattering() -> CriterionResult {
    timed(4, "scattering structure", || {
        let (params, q) = flagship();
        let mut worst_conj = 0.0f64;
        let mut worst_unimod = 0.0f64;
        let mut worst_antisym = 0.0f64;
        let mut worst_sc = 0.0f64;
        for lambda in [1.5, -1.5] {
            let ep = make_energy(&params, lambda)?;
            let pair = solve_pair(&params, &ep, &q)?;
            let v0 = StationaryDeviation::new(&ep, &q, 1.0);
            let sd = extract_coefficients(&pair.regular, &pair.jost, &ep, &v0)?;
            worst_conj = worst_conj.max(sd.conjugacy_defect);
            worst_unimod = worst_unimod.max((sd.s11.norm() - 1.0).abs());
            let s21 = sd.c1[1] / sd.c1[1].conj();
            worst_antisym = worst_antisym.max((sd.s11 + s21).norm());
            // S C2 = C1 with the independently fitted C2.
            let s_mat = [sd.s11, -sd.s11];
            for comp in 0..2 {
                worst_sc = worst_sc.max(
                    (s_mat[comp] * sd.c2[comp] - sd.c1[comp]).norm() / sd.c1[comp].norm(),
                );
            }
        }
        // Free reference problem: c21/c11 = i beta.
        let ep = EnergyPoint::free(1.0, 1.5)?;
        let grid = picard_grid(&ep, 25.0);
        let mut reg = Vec::new();
        let mut jos = Vec::new();
        for &r in grid.points() {
            let (s, c) = (ep.epsilon * r).sin_cos();
            reg.push(Spinor::new(
                Complex64::new(c, 0.0),
                Complex64::new(ep.beta * s, 0.0),
            ));
            let phase = (-Complex64::i() * ep.epsilon * r).exp();
            jos.push(Spinor::new(
                ep.sqrt_m_plus_lambda * phase,
                -ep.sqrt_m_minus_lambda * phase,
            ));
        }
        let meta = |kind| crate::perturb::SolveMeta {
            kind,
            iterations: 1,
            increments: vec![0.0],
            contraction_ratio: 0.0,
            r_infinity: grid.r_max(),
        };
        let reg_grid = crate::perturb::SolutionGrid {
            radii: grid.points().to_vec(),
            values: reg,
            meta: meta(crate::perturb::SolutionKind::Regular),
            tail_coefficients: [Complex64::new(0.0, 0.0); 2],
        };
        let jos_grid = crate::perturb::SolutionGrid {
            radii: grid.points().to_vec(),
            values: jos,
            meta: meta(crate::perturb::SolutionKind::Jost),
            tail_coefficients: [Complex64::new(0.0, 0.0); 2],
        };
        let v0 = StationaryDeviation::new(&ep, &PerturbationSpec::None, 1.0);
        let sd = extract_coefficients(&reg_grid, &jos_grid, &ep, &v0)?;
        let ratio_err =
            (sd.c1[1] / sd.c1[0] - Complex64::new(0.0, ep.beta)).norm();

        let pass = worst_conj <= 1e-4
            && worst_unimod <= 1e-12
            && worst_antisym <= 1e-6
            && worst_sc <= 1e-6
            && ratio_err <= 1e-6;
        Ok((
            pass,
            format!(
                "conjugacy {worst_conj:.2e} (<=1e-4), |s11|-1 {worst_unimod:.2e} (<=1e-12), antisym {worst_antisym:.2e} / S.C2=C1 {worst_sc:.2e} (<=1e-6), free ratio {ratio_err:.2e} (<=1e-6)"
            ),
        ))
    })
}

/// 5: spectral transforms.
pub fn criterion_5_spectral() -> CriterionResult {
    timed(5, "spectral transforms", || {
        let (params, q) = flagship();
        let mass = params.mass;
        let packets = [
            Packet::new(mass, 1.5, 0.35)?,
            Packet::new(mass, 2.2, 0.5)?,
            Packet::new(mass, -1.6, 0.4)?,
            Packet::new(mass, 3.1, 0.3)?,
            Packet::new(mass, -2.8, 0.45)?,
        ];
        let r_max = 500.0;
        let h = 0.01;
        let mut parseval_free = 0.0f64;
        let mut roundtrip = 0.0f64;
        for p in &packets {
            let nodes = SpectralNodes::for_packet(p, mass, r_max)?;
            let amp: Vec<Complex64> = nodes
                .nodes
                .iter()
                .map(|&u| Complex64::new(p.eval(u), 0.0))
                .collect();
            let hfun = u0_forward(mass, &nodes, &amp, r_max, h)?;
            let lhs: f64 = nodes
                .nodes
                .iter()
                .zip(&nodes.weights)
                .zip(&amp)
                .map(|((&u, &w), a)| w * a.norm_sqr() * rho1(u, mass).unwrap_or(0.0))
                .sum();
            parseval_free = parseval_free.max(((lhs - hfun.norm_sq()) / lhs).abs());
            let (a, b) = p.support();
            for k in 1..=5 {
                let lam = a + (b - a) * k as f64 / 6.0;
                let back = u0_inverse(mass, &hfun, lam)?;
                roundtrip = roundtrip.max((back - p.eval(lam)).norm());
            }
        }

        // Perturbed transform.
        let p = Packet::new(mass, 1.5, 0.4)?;
        let basis = PerturbedBasis::build(&params, &q, &p, 400.0, 400.0, 0.01)?;
        let amp: Vec<Complex64> = basis
            .nodes
            .nodes
            .iter()
            .map(|&u| Complex64::new(p.eval(u), 0.0))
            .collect();
        let hfun = basis.forward(&amp)?;
        let lhs: f64 = basis
            .nodes
            .weights
            .iter()
            .zip(&amp)
            .enumerate()
            .map(|(j, (&w, a))| w * a.norm_sqr() * basis.rho[j])
            .sum();
        let parseval_pert = ((lhs - hfun.norm_sq()) / lhs).abs();

        // Intertwining, free and perturbed.
        let inter_free = intertwine_free(mass, &p)?;
        let inter_pert = intertwine_perturbed(&params, &q, &basis, &p, &hfun, &amp)?;

        let pass = parseval_free <= 1e-6
            && parseval_pert <= 1e-4
            && roundtrip <= 1e-6
            && inter_free <= 1e-5
            && inter_pert <= 1e-5;
        Ok((
            pass,
            format!(
                "Parseval free {parseval_free:.2e} (<=1e-6) / perturbed {parseval_pert:.2e} (<=1e-4), roundtrip {roundtrip:.2e} (<=1e-6), intertwining {:.2e} (<=1e-5)",
                inter_free.max(inter_pert)
            ),
        ))
    })
}

fn intertwine_free(mass: f64, p: &Packet) -> Result<f64> {
    let r_span = 60.0;
    let h = 0.004;
    let nodes = SpectralNodes::for_packet(p, mass, r_span)?;
    let amp: Vec<Complex64> = nodes
        .nodes
        .iter()
        .map(|&u| Complex64::new(p.eval(u), 0.0))
        .collect();
    let lam_amp: Vec<Complex64> = nodes.nodes.iter().zip(&amp).map(|(&u, a)| u * a).collect();
    let h0 = u0_forward(mass, &nodes, &amp, r_span, h)?;
    let h1 = u0_forward(mass, &nodes, &lam_amp, r_span, h)?;
    let expr = DifferentialExpression::free(mass);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in (10..h0.len() - 10).step_by(131) {
        let lhs = expr.apply(&h0, i);
        let rhs = h1.values[i];
        worst = worst
            .max((lhs[0] - rhs[0]).norm())
            .max((lhs[1] - rhs[1]).norm());
        scale = scale.max(rhs[0].norm()).max(rhs[1].norm());
    }
    Ok(worst / scale.max(1e-300))
}

fn intertwine_perturbed(
    params: &SystemParams,
    q: &PerturbationSpec,
    basis: &PerturbedBasis,
    _p: &Packet,
    h0: &crate::spectral::RadialFunction,
    amp: &[Complex64],
) -> Result<f64> {
    let lam_amp: Vec<Complex64> = basis
        .nodes
        .nodes
        .iter()
        .zip(amp)
        .map(|(&u, a)| u * a)
        .collect();
    let h1 = basis.forward(&lam_amp)?;
    let expr = DifferentialExpression {
        mass: params.mass,
        angular: params.angular,
        coulomb_strength: params.coulomb_strength,
        q: Some(q),
    };
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let lo = (1.0 / h0.h) as usize;
    for i in (lo..h0.len() - 10).step_by(977) {
        let lhs = expr.apply(h0, i);
        let rhs = h1.values[i];
        worst = worst
            .max((lhs[0] - rhs[0]).norm())
            .max((lhs[1] - rhs[1]).norm());
        scale = scale.max(rhs[0].norm()).max(rhs[1].norm());
    }
    Ok(worst / scale.max(1e-300))
}

/// 6: distributional Fourier oracle.
pub fn criterion_6_distributional() -> CriterionResult {
    timed(6, "distributional integral", || {
        let samples: [(Complex64, f64); 10] = [
            (Complex64::new(0.0, 0.0), 2.0),
            (Complex64::new(0.0, 0.6), 2.0),
            (Complex64::new(0.0, 0.6), -2.0),
            (Complex64::new(0.0, 1.2), 3.7),
            (Complex64::new(0.0, -0.8), 2.5),
            (Complex64::new(0.3, 0.4), 5.0),
            (Complex64::new(-0.4, 0.8), 2.0),
            (Complex64::new(0.25, 0.0), -3.0),
            (Complex64::new(-0.2, -0.5), 4.0),
            (Complex64::new(0.1, 0.9), -5.0),
        ];
        let mut worst = 0.0f64;
        for (mu, x) in samples {
            let closed = distributional_fourier_closed(mu, x)?;
            let (quad, _) = distributional_fourier_quadrature(mu, x)?;
            worst = worst.max((closed - quad).norm() / closed.norm().max(1e-300));
        }
        Ok((worst <= 1e-4, format!("max closed-vs-quadrature {worst:.2e} (<=1e-4)")))
    })
}

/// 7: dynamical limits at the designated probe.
pub fn criterion_7_dynamics() -> CriterionResult {
    timed(7, "dynamical limits", || {
        let (params, q) = flagship();
        let mut cfg = DynamicsConfig::default();
        cfg.wrong_direction = true;
        let probe = run_probe(&params, &q, 1.5, &cfg)?;
        // Cauchy property on the octave subgrid 50 -> 100 -> 200 -> 400.
        let octave = octave_increments(&probe.trace_plus.times, &probe.trace_plus.values);
        let cauchy = octave.windows(2).all(|w| w[1] < w[0]);
        let pass = cauchy
            && probe.limit_value_error <= 1e-2
            && probe.wrong_direction_ratio <= 0.05;
        Ok((
            pass,
            format!(
                "octave increments {:?} decreasing: {cauchy}, limit err {:.2e} (<=1e-2), wrong-direction {:.2e} (<=0.05)",
                octave
                    .iter()
                    .map(|x| format!("{x:.1e}"))
                    .collect::<Vec<_>>(),
                probe.limit_value_error,
                probe.wrong_direction_ratio
            ),
        ))
    })
}

fn octave_increments(times: &[f64], values: &[Complex64]) -> Vec<f64> {
    let t0 = times[0];
    let marks = [2.0 * t0, 4.0 * t0, 8.0 * t0, 16.0 * t0];
    let mut picked = vec![(t0, values[0])];
    for &m in &marks {
        if let Some(i) = times.iter().position(|&t| (t - m).abs() < 0.01 * m) {
            picked.push((times[i], values[i]));
        }
    }
    picked.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect()
}

/// 8: the headline ergodic equality on the flagship grid.
pub fn criterion_8_ergodic(threads: usize) -> CriterionResult {
    timed(8, "ergodic equality", || {
        let (params, q) = flagship();
        let cfg = DynamicsConfig::default();
        let probes = map_lambda_grid(&FLAGSHIP_GRID, threads, |lambda| {
            run_probe(&params, &q, lambda, &cfg)
        })?;
        let max_res = probes.iter().map(|p| p.residual).fold(0.0, f64::max);
        let unitarity = probes
            .iter()
            .map(|p| (p.s_dyn.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok((
            max_res < 1e-3 && unitarity < 1e-12,
            format!("max |S_dyn - S_st| {max_res:.2e} (<1e-3), |S_dyn| unitary to {unitarity:.1e}"),
        ))
    })
}

/// 9: classical case A = 0.
pub fn criterion_9_classical(threads: usize) -> CriterionResult {
    timed(9, "classical case", || {
        let params = SystemParams::new(1.0, 2.0, 0.0)?;
        let q = PerturbationSpec::exp_decay(0.3, 1.0);
        let cfg = DynamicsConfig::default();
        let grid = [1.5, 2.0, -1.5, -2.0];
        let probes = map_lambda_grid(&grid, threads, |lambda| {
            run_probe(&params, &q, lambda, &cfg)
        })?;
        let max_res = probes.iter().map(|p| p.residual).fold(0.0, f64::max);

        let report = free_case_identities(1.0, 2.0, &[1.5, 3.0], 200.0)?;
        let pass = max_res < 1e-3
            && report.max_log_identity_error <= 1e-5
            && report.max_pv_error <= 2e-3;
        Ok((
            pass,
            format!(
                "max |S_dyn - S_st| {max_res:.2e} (<1e-3), log identity {:.2e} (<=1e-5), PV limit {:.2e} (<=2e-3)",
                report.max_log_identity_error, report.max_pv_error
            ),
        ))
    })
}

/// 10: deviation-factor identities.
pub fn criterion_10_deviation() -> CriterionResult {
    timed(10, "deviation factors", || {
        let (params, _) = flagship();
        let mut gap = 0.0f64;
        let mut sluggish_ok = true;
        for &lambda in &FLAGSHIP_GRID {
            let rep = deviation_identities(&make_energy(&params, lambda)?)?;
            gap = gap.max(rep.stationary_dynamical_gap);
            sluggish_ok &= rep.sluggishness_margin_ok;
        }
        Ok((
            gap <= 1e-13 && sluggish_ok,
            format!("stationary-dynamical gap {gap:.1e} (machine), sluggishness bound: {sluggish_ok}"),
        ))
    })
}

/// Run every criterion, in order.
pub fn run_all(threads: usize) -> Vec<CriterionResult> {
    vec![
        criterion_1_specfun(),
        criterion_2_coulomb(),
        criterion_3_perturbed(),
        criterion_4_scattering(),
        criterion_5_spectral(),
        criterion_6_distributional(),
        criterion_7_dynamics(),
        criterion_8_ergodic(threads),
        criterion_9_classical(threads),
        criterion_10_deviation(),
    ]
}
