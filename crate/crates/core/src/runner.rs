//! Scenario execution: fans the lambda grid out over worker threads,
//! assembles the deterministic report, and evaluates the pass gates.

use num_complex::Complex64;

use crate::config::{RunConfig, Scenario};
use crate::coulomb::{coulomb_system, make_energy, ode_residual, WhichSolution};
use crate::dynamics::{deviation_identities, run_probe};
use crate::error::{Error, Result};
use crate::perturb::{solve_pair, PerturbationSpec};
use crate::report::{CoulombRow, RunReport, ScatterRow, SpectralSummary};
use crate::scatter::{extract_coefficients, ScatteringData, StationaryDeviation};
use crate::spectral::{rho1, u0_forward, u0_inverse, Packet, PerturbedBasis, SpectralNodes};

/// Number of worker threads: explicit config, then the environment
/// variable, then the machine's parallelism.
pub fn thread_count(cfg: &RunConfig, cli_threads: Option<usize>) -> usize {
    cli_threads
        .or(cfg.threads)
        .or_else(|| {
            std::env::var("DIRAC_SCATTER_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

/// Map a fallible per-energy job over the grid on `threads` workers,
/// preserving grid order in the output.
pub fn map_lambda_grid<T, F>(grid: &[f64], threads: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    if threads <= 1 || grid.len() <= 1 {
        return grid.iter().map(|&l| job(l)).collect();
    }
    let n = grid.len();
    let mut slots: Vec<Option<Result<T>>> = (0..n).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let out = job(grid[i]);
                slots_ref.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}

pub fn run(config: &RunConfig, cli_threads: Option<usize>) -> Result<RunReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let params = config.system_params()?;
    let threads = thread_count(config, cli_threads);
    let q = config.perturbation.clone();

    let mut report = RunReport {
        config: config.clone(),
        content_hash: config.content_hash(),
        scenario_passed: false,
        scatter_rows: vec![],
        coulomb_rows: vec![],
        spectral: None,
        probes: vec![],
        deviation_identities: vec![],
        free_case: None,
        max_ergodic_residual: None,
        wall_clock_seconds: 0.0,
    };

    match config.scenario {
        Scenario::Coulomb => {
            let rows = map_lambda_grid(&config.lambda_grid, threads, |lambda| {
                coulomb_row(&params, lambda)
            })?;
            report.scenario_passed = rows
                .iter()
                .all(|r| r.det_drift < 1e-8 && r.ode_residual < 1e-7);
            report.coulomb_rows = rows;
        }
        Scenario::Scatter => {
            let rows = map_lambda_grid(&config.lambda_grid, threads, |lambda| {
                let sd = scattering_at(&params, &q, lambda)?;
                Ok(ScatterRow {
                    lambda,
                    c11: sd.c1[0],
                    s11: sd.s11,
                    rho: sd.rho,
                    s_dyn: Complex64::new(f64::NAN, f64::NAN),
                    residual: f64::NAN,
                })
            })?;
            report.scenario_passed = rows.iter().all(|r| r.s11.norm().is_finite());
            report.scatter_rows = rows;
        }
        Scenario::Spectral => {
            let summary = spectral_suite(&params, &q, config)?;
            report.scenario_passed = summary.parseval_free_rel
                < config.tolerances.parseval_free
                && summary.parseval_perturbed_rel < config.tolerances.parseval_perturbed;
            report.spectral = Some(summary);
        }
        Scenario::Ergodic | Scenario::FreeCase => {
            let cfg = config.dynamics_config();
            let probes = map_lambda_grid(&config.lambda_grid, threads, |lambda| {
                run_probe(&params, &q, lambda, &cfg)
            })?;
            let mut max_res = 0.0f64;
            for p in &probes {
                max_res = max_res.max(p.residual);
                report.scatter_rows.push(ScatterRow {
                    lambda: p.lambda,
                    c11: p.scattering.c1[0],
                    s11: p.s_st,
                    rho: p.scattering.rho,
                    s_dyn: p.s_dyn,
                    residual: p.residual,
                });
            }
            for &lambda in &config.lambda_grid {
                report
                    .deviation_identities
                    .push(deviation_identities(&make_energy(&params, lambda)?)?);
            }
            if config.scenario == Scenario::FreeCase {
                let lambda0 = config
                    .lambda_grid
                    .iter()
                    .copied()
                    .find(|&l| l > 0.0)
                    .unwrap_or(2.0);
                let u_lo = params.mass + 0.5 * (lambda0 - params.mass);
                let u_hi = lambda0 + 1.0;
                report.free_case = Some(crate::dynamics::free_case_identities(
                    params.mass,
                    lambda0,
                    &[u_lo, u_hi],
                    200.0,
                )?);
            }
            report.max_ergodic_residual = Some(max_res);
            report.probes = probes;
            let identities_ok = report
                .deviation_identities
                .iter()
                .all(|d| d.stationary_dynamical_gap < 1e-12 && d.sluggishness_margin_ok);
            let free_ok = report
                .free_case
                .as_ref()
                .map(|f| f.max_log_identity_error < 1e-5 && f.max_pv_error < 2e-3)
                .unwrap_or(true);
            report.scenario_passed =
                max_res < config.tolerances.ergodic_residual && identities_ok && free_ok;
        }
    }

    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

fn coulomb_row(params: &crate::coulomb::SystemParams, lambda: f64) -> Result<CoulombRow> {
    if params.coulomb_strength == 0.0 {
        return Err(Error::Unsupported(
            "the coulomb scenario needs A != 0".into(),
        ));
    }
    let ep = make_energy(params, lambda)?;
    let sys = coulomb_system(params, &ep)?;
    let d_ref = sys.det_constant()?;
    let mut det_drift = 0.0f64;
    for r in [1e-3, 0.5, 20.0, 1e3] {
        let d = sys.fundamental_matrix(r)?.det();
        det_drift = det_drift.max((d - d_ref).norm() / d_ref.norm());
    }
    let gamma = ep.gamma;
    let reg_ratio = sys.regular(1e-4)?.norm() / sys.regular(1e-3)?.norm();
    let regular_exponent_error = (reg_ratio * 10f64.powf(gamma) - 1.0).abs();
    let irr_ratio = sys.irregular(1e-4)?.norm() / sys.irregular(1e-3)?.norm();
    let irregular_exponent_error = (irr_ratio / 10f64.powf(gamma) - 1.0).abs();
    let mut worst = 0.0f64;
    for r in [0.05, 0.5, 3.0, 15.0] {
        worst = worst.max(ode_residual(
            params,
            lambda,
            |_| 0.0,
            |rr| sys.regular(rr),
            r,
        )?);
    }
    let _ = WhichSolution::Regular;
    Ok(CoulombRow {
        lambda,
        det_drift,
        regular_exponent_error,
        irregular_exponent_error,
        ode_residual: worst,
    })
}

/// Scattering data at one energy through the Picard pair.
pub fn scattering_at(
    params: &crate::coulomb::SystemParams,
    q: &PerturbationSpec,
    lambda: f64,
) -> Result<ScatteringData> {
    let ep = make_energy(params, lambda)?;
    let pair = solve_pair(params, &ep, q)?;
    let v0 = StationaryDeviation::new(&ep, q, 1.0);
    extract_coefficients(&pair.regular, &pair.jost, &ep, &v0)
}

/// The transform suite behind the spectral scenario.
pub fn spectral_suite(
    params: &crate::coulomb::SystemParams,
    q: &PerturbationSpec,
    config: &RunConfig,
) -> Result<SpectralSummary> {
    let mass = params.mass;
    let packs = if config.packets.is_empty() {
        vec![
            Packet::new(mass, 1.5, 0.35)?,
            Packet::new(mass, 2.2, 0.5)?,
            Packet::new(mass, -1.6, 0.4)?,
        ]
    } else {
        config
            .packets
            .iter()
            .map(|p| Packet::new(mass, p.center, p.width))
            .collect::<Result<_>>()?
    };

    let r_max = 400.0;
    let h = 0.01;
    let mut summary = SpectralSummary::default();

    for p in &packs {
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
        let rhs = hfun.norm_sq();
        summary.parseval_free_rel = summary
            .parseval_free_rel
            .max(((lhs - rhs) / lhs).abs());
        let (a, b) = p.support();
        for k in 1..=3 {
            let lam = a + (b - a) * k as f64 / 4.0;
            let back = u0_inverse(mass, &hfun, lam)?;
            summary.roundtrip_free_max = summary
                .roundtrip_free_max
                .max((back - p.eval(lam)).norm());
        }
    }

    // Perturbed transform on the first positive packet.
    let p = packs
        .iter()
        .find(|p| p.center > 0.0)
        .cloned()
        .unwrap_or(Packet::new(mass, 1.5, 0.35)?);
    let basis = PerturbedBasis::build(params, q, &p, r_max, r_max, h)?;
    let amp: Vec<Complex64> = basis
        .nodes
        .nodes
        .iter()
        .map(|&u| Complex64::new(p.eval(u), 0.0))
        .collect();
    let hfun = basis.forward(&amp)?;
    let lhs: f64 = basis
        .nodes
        .nodes
        .iter()
        .zip(&basis.nodes.weights)
        .zip(&amp)
        .enumerate()
        .map(|(j, ((_, &w), a))| w * a.norm_sqr() * basis.rho[j])
        .sum();
    let rhs = hfun.norm_sq();
    summary.parseval_perturbed_rel = ((lhs - rhs) / lhs).abs();

    // Intertwining residuals, free and perturbed.
    summary.intertwining_free = intertwining_residual(mass, None, None, &p, r_max)?;
    summary.intertwining_perturbed =
        intertwining_residual(mass, Some((params, q)), Some(&basis), &p, r_max)?;
    Ok(summary)
}

fn intertwining_residual(
    mass: f64,
    perturbed: Option<(&crate::coulomb::SystemParams, &PerturbationSpec)>,
    basis: Option<&PerturbedBasis>,
    packet: &Packet,
    r_max: f64,
) -> Result<f64> {
    let h = 0.004;
    let r_span = 60.0f64.min(r_max);
    match (perturbed, basis) {
        (None, _) => {
            let nodes = SpectralNodes::for_packet(packet, mass, r_span)?;
            let amp: Vec<Complex64> = nodes
                .nodes
                .iter()
                .map(|&u| Complex64::new(packet.eval(u), 0.0))
                .collect();
            let lam_amp: Vec<Complex64> = nodes
                .nodes
                .iter()
                .zip(&amp)
                .map(|(&u, a)| u * a)
                .collect();
            let h0 = u0_forward(mass, &nodes, &amp, r_span, h)?;
            let h1 = u0_forward(mass, &nodes, &lam_amp, r_span, h)?;
            let expr = crate::spectral::DifferentialExpression::free(mass);
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
        (Some((params, q)), Some(basis)) => {
            let amp: Vec<Complex64> = basis
                .nodes
                .nodes
                .iter()
                .map(|&u| Complex64::new(packet.eval(u), 0.0))
                .collect();
            let lam_amp: Vec<Complex64> = basis
                .nodes
                .nodes
                .iter()
                .zip(&amp)
                .map(|(&u, a)| u * a)
                .collect();
            let h0 = basis.forward(&amp)?;
            let h1 = basis.forward(&lam_amp)?;
            let expr = crate::spectral::DifferentialExpression {
                mass,
                angular: params.angular,
                coulomb_strength: params.coulomb_strength,
                q: Some(q),
            };
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            let lo = (1.0 / h0.h) as usize;
            let n = h0.len();
            for i in (lo..n - 10).step_by(977) {
                let lhs = expr.apply(&h0, i);
                let rhs = h1.values[i];
                worst = worst
                    .max((lhs[0] - rhs[0]).norm())
                    .max((lhs[1] - rhs[1]).norm());
                scale = scale.max(rhs[0].norm()).max(rhs[1].norm());
            }
            Ok(worst / scale.max(1e-300))
        }
        _ => Err(Error::Unsupported("missing basis".into())),
    }
}
