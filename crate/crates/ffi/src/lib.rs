//! C ABI for the dirac-scatter library.
//!
//! Opaque handles own the Rust objects; every function returns a status
//! code from `DsStatus` and writes results through out-pointers. The
//! header `include/dirac_scatter.h` is maintained by hand and checked
//! against the exported surface by a test.

use std::ffi::{c_char, c_double, c_int, CStr};

use dirac_scatter::config::load_config;
use dirac_scatter::coulomb::{make_energy, SystemParams};
use dirac_scatter::dynamics::{run_probe, DynamicsConfig};
use dirac_scatter::perturb::{solve_pair, PerturbationSpec};
use dirac_scatter::runner;
use dirac_scatter::scatter::{deviation_factor, extract_coefficients, StationaryDeviation};
use dirac_scatter::spectral::rho1;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    SpectralGap = 3,
    NonConvergence = 4,
    IoError = 5,
    InternalError = 6,
}

fn map_err(e: &dirac_scatter::Error) -> DsStatus {
    use dirac_scatter::Error as E;
    match e {
        E::SpectralGap { .. } => DsStatus::SpectralGap,
        E::NonConvergence(_) | E::OscillationResolution(_) => DsStatus::NonConvergence,
        E::Io(_) | E::Parse(_) => DsStatus::IoError,
        E::Validation { .. } | E::Unsupported(_) => DsStatus::InvalidArgument,
        _ => DsStatus::InternalError,
    }
}

/// One scattering problem: the system triple plus a perturbation.
pub struct DsProblem {
    params: SystemParams,
    q: PerturbationSpec,
}

/// Scattering data at one energy, plain-old-data for C consumers.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DsScatteringData {
    pub lambda: c_double,
    pub c11_re: c_double,
    pub c11_im: c_double,
    pub c21_re: c_double,
    pub c21_im: c_double,
    pub s11_re: c_double,
    pub s11_im: c_double,
    pub rho: c_double,
    pub rho1: c_double,
    pub conjugacy_defect: c_double,
}

/// Stationary/dynamical comparison at one energy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DsErgodicPoint {
    pub lambda: c_double,
    pub s_st_re: c_double,
    pub s_st_im: c_double,
    pub s_dyn_re: c_double,
    pub s_dyn_im: c_double,
    pub residual: c_double,
    pub limit_value_error: c_double,
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a problem with an exponential-decay perturbation
/// q(r) = amplitude * exp(-rate r); pass amplitude = 0 for none.
/// Returns null on invalid parameters.
#[no_mangle]
pub extern "C" fn ds_problem_new(
    mass: c_double,
    angular: c_double,
    coulomb_strength: c_double,
    q_amplitude: c_double,
    q_rate: c_double,
) -> *mut DsProblem {
    let params = match SystemParams::new(mass, angular, coulomb_strength) {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    let q = if q_amplitude == 0.0 {
        PerturbationSpec::None
    } else if q_rate > 0.0 {
        PerturbationSpec::exp_decay(q_amplitude, q_rate)
    } else {
        return std::ptr::null_mut();
    };
    Box::into_raw(Box::new(DsProblem { params, q }))
}

/// Destroy a problem handle. Null is tolerated.
///
/// # Safety
/// `problem` must come from `ds_problem_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ds_problem_free(problem: *mut DsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Free spectral density rho1(sigma) for mass m.
#[no_mangle]
pub extern "C" fn ds_rho1(sigma: c_double, mass: c_double, out: *mut c_double) -> DsStatus {
    if out.is_null() {
        return DsStatus::NullArgument;
    }
    match rho1(sigma, mass) {
        Ok(v) => {
            unsafe { *out = v };
            DsStatus::Ok
        }
        Err(e) => map_err(&e),
    }
}

/// Stationary deviation factor V0(r) at one energy, reference point 1.
///
/// # Safety
/// `problem` must be a live handle; `out_re`/`out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_deviation_factor(
    problem: *const DsProblem,
    lambda: c_double,
    r: c_double,
    out_re: *mut c_double,
    out_im: *mut c_double,
) -> DsStatus {
    if problem.is_null() || out_re.is_null() || out_im.is_null() {
        return DsStatus::NullArgument;
    }
    let p = &*problem;
    if r <= 0.0 {
        return DsStatus::InvalidArgument;
    }
    match make_energy(&p.params, lambda) {
        Ok(ep) => {
            let v = deviation_factor(&ep, &p.q, 1.0, r);
            *out_re = v.re;
            *out_im = v.im;
            DsStatus::Ok
        }
        Err(e) => map_err(&e),
    }
}

/// Solve the stationary scattering problem at one energy.
///
/// # Safety
/// `problem` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ds_scattering_compute(
    problem: *const DsProblem,
    lambda: c_double,
    out: *mut DsScatteringData,
) -> DsStatus {
    if problem.is_null() || out.is_null() {
        return DsStatus::NullArgument;
    }
    let p = &*problem;
    let inner = || -> dirac_scatter::Result<DsScatteringData> {
        let ep = make_energy(&p.params, lambda)?;
        let pair = solve_pair(&p.params, &ep, &p.q)?;
        let v0 = StationaryDeviation::new(&ep, &p.q, 1.0);
        let sd = extract_coefficients(&pair.regular, &pair.jost, &ep, &v0)?;
        Ok(DsScatteringData {
            lambda,
            c11_re: sd.c1[0].re,
            c11_im: sd.c1[0].im,
            c21_re: sd.c1[1].re,
            c21_im: sd.c1[1].im,
            s11_re: sd.s11.re,
            s11_im: sd.s11.im,
            rho: sd.rho,
            rho1: sd.rho1,
            conjugacy_defect: sd.conjugacy_defect,
        })
    };
    match inner() {
        Ok(data) => {
            *out = data;
            DsStatus::Ok
        }
        Err(e) => map_err(&e),
    }
}

/// Run the dynamical pipeline at one energy and compare the scattering
/// entries. This is the expensive call (tens of seconds per energy).
///
/// # Safety
/// `problem` must be a live handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ds_ergodic_compute(
    problem: *const DsProblem,
    lambda: c_double,
    out: *mut DsErgodicPoint,
) -> DsStatus {
    if problem.is_null() || out.is_null() {
        return DsStatus::NullArgument;
    }
    let p = &*problem;
    match run_probe(&p.params, &p.q, lambda, &DynamicsConfig::default()) {
        Ok(probe) => {
            *out = DsErgodicPoint {
                lambda,
                s_st_re: probe.s_st.re,
                s_st_im: probe.s_st.im,
                s_dyn_re: probe.s_dyn.re,
                s_dyn_im: probe.s_dyn.im,
                residual: probe.residual,
                limit_value_error: probe.limit_value_error,
            };
            DsStatus::Ok
        }
        Err(e) => map_err(&e),
    }
}

/// Execute a config file end to end, writing the report to its output
/// directory. `threads` <= 0 means automatic.
///
/// # Safety
/// `config_path` must be a valid NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn ds_run_config(config_path: *const c_char, threads: c_int) -> DsStatus {
    if config_path.is_null() {
        return DsStatus::NullArgument;
    }
    let path = match CStr::from_ptr(config_path).to_str() {
        Ok(s) => s,
        Err(_) => return DsStatus::InvalidArgument,
    };
    let config = match load_config(path) {
        Ok(c) => c,
        Err(e) => return map_err(&e),
    };
    let t = if threads > 0 {
        Some(threads as usize)
    } else {
        None
    };
    match runner::run(&config, t) {
        Ok(report) => match report.write_to(&config.output_dir) {
            Ok(()) => {
                if report.scenario_passed {
                    DsStatus::Ok
                } else {
                    DsStatus::NonConvergence
                }
            }
            Err(e) => map_err(&e),
        },
        Err(e) => map_err(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_lifecycle_and_rho1() {
        let p = ds_problem_new(1.0, 2.0, 0.5, 0.3, 1.0);
        assert!(!p.is_null());
        let mut out = 0.0;
        assert_eq!(ds_rho1(2.0, 1.0, &mut out), DsStatus::Ok);
        assert!((out - 3.0f64.sqrt() / std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(ds_rho1(0.5, 1.0, &mut out), DsStatus::SpectralGap);
        unsafe { ds_problem_free(p) };
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ds_problem_new(1.0, 1.0, 1.0, 0.0, 0.0).is_null());
        assert!(ds_problem_new(-1.0, 2.0, 0.5, 0.0, 0.0).is_null());
        assert!(ds_problem_new(1.0, 2.0, 0.5, 0.3, -1.0).is_null());
    }

    #[test]
    fn scattering_through_the_abi() {
        let p = ds_problem_new(1.0, 2.0, 0.5, 0.3, 1.0);
        let mut data = DsScatteringData::default();
        let status = unsafe { ds_scattering_compute(p, 1.5, &mut data) };
        assert_eq!(status, DsStatus::Ok);
        let s11 = (data.s11_re * data.s11_re + data.s11_im * data.s11_im).sqrt();
        assert!((s11 - 1.0).abs() < 1e-10);
        assert!(data.rho > 0.0);
        // Gap energy surfaces as the dedicated status.
        let status = unsafe { ds_scattering_compute(p, 0.9, &mut data) };
        assert_eq!(status, DsStatus::SpectralGap);
        unsafe { ds_problem_free(p) };
    }

    #[test]
    fn deviation_factor_unimodular() {
        let p = ds_problem_new(1.0, 2.0, 0.5, 0.0, 0.0);
        let (mut re, mut im) = (0.0, 0.0);
        let status = unsafe { ds_deviation_factor(p, 1.5, 7.0, &mut re, &mut im) };
        assert_eq!(status, DsStatus::Ok);
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-12);
        unsafe { ds_problem_free(p) };
    }

    #[test]
    fn header_matches_exported_surface() {
        // Every #[no_mangle] function must appear in the hand-written
        // header, and vice versa.
        let header = include_str!("../include/dirac_scatter.h");
        let source = include_str!("lib.rs");
        // Only the production half of the file declares exports.
        let source = source.split("#[cfg(test)]").next().unwrap();
        let mut exported: Vec<&str> = Vec::new();
        for part in source.split("#[no_mangle]").skip(1) {
            if let Some(pos) = part.find("fn ") {
                let rest = &part[pos + 3..];
                let name = rest.split('(').next().unwrap().trim();
                exported.push(name);
            }
        }
        assert!(!exported.is_empty());
        for name in &exported {
            assert!(
                header.contains(&format!("{name}(")),
                "header is missing `{name}`"
            );
        }
    }
}
