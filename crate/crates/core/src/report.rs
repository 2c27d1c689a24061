//! Run reports and their persistence: a JSON document with the full
//! diagnostics and RFC-4180 CSV tables with 17 significant digits.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::{DeviationIdentityReport, FreeCaseReport, ProbeRun};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterRow {
    pub lambda: f64,
    pub c11: Complex64,
    pub s11: Complex64,
    pub rho: f64,
    /// Dynamical entry; NaN when the scenario did not compute it.
    pub s_dyn: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SpectralSummary {
    pub parseval_free_rel: f64,
    pub parseval_perturbed_rel: f64,
    pub roundtrip_free_max: f64,
    pub intertwining_free: f64,
    pub intertwining_perturbed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoulombRow {
    pub lambda: f64,
    pub det_drift: f64,
    pub regular_exponent_error: f64,
    pub irregular_exponent_error: f64,
    pub ode_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub content_hash: String,
    pub scenario_passed: bool,
    pub scatter_rows: Vec<ScatterRow>,
    #[serde(default)]
    pub coulomb_rows: Vec<CoulombRow>,
    #[serde(default)]
    pub spectral: Option<SpectralSummary>,
    #[serde(default)]
    pub probes: Vec<ProbeRun>,
    #[serde(default)]
    pub deviation_identities: Vec<DeviationIdentityReport>,
    #[serde(default)]
    pub free_case: Option<FreeCaseReport>,
    pub max_ergodic_residual: Option<f64>,
    /// Diagnostics only; excluded from the deterministic CSV surface.
    pub wall_clock_seconds: f64,
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl RunReport {
    /// results.csv: one row per energy.
    pub fn results_csv(&self) -> String {
        let mut out = String::from(
            "lambda,c11_re,c11_im,s11_re,s11_im,rho,s_dyn_re,s_dyn_im,dyn_st_residual\r\n",
        );
        for row in &self.scatter_rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\r\n",
                fmt(row.lambda),
                fmt(row.c11.re),
                fmt(row.c11.im),
                fmt(row.s11.re),
                fmt(row.s11.im),
                fmt(row.rho),
                fmt(row.s_dyn.re),
                fmt(row.s_dyn.im),
                fmt(row.residual),
            ));
        }
        out
    }

    /// traces.csv: the compensated wave-operator traces.
    pub fn traces_csv(&self) -> String {
        let mut out =
            String::from("lambda,direction,t,value_re,value_im,increment\r\n");
        for probe in &self.probes {
            for (dir, trace) in [("plus", &probe.trace_plus), ("minus", &probe.trace_minus)] {
                for (i, (t, v)) in trace.times.iter().zip(&trace.values).enumerate() {
                    let inc = if i == 0 {
                        f64::NAN
                    } else {
                        trace.increments[i - 1]
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\r\n",
                        fmt(probe.lambda),
                        dir,
                        fmt(*t),
                        fmt(v.re),
                        fmt(v.im),
                        fmt(inc),
                    ));
                }
            }
        }
        out
    }

    pub fn write_to(&self, dir: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("mkdir {dir}: {e}")))?;
        let write = |name: &str, data: &[u8]| -> Result<()> {
            let path = format!("{dir}/{name}");
            let mut f = std::fs::File::create(&path)
                .map_err(|e| Error::Io(format!("create {path}: {e}")))?;
            f.write_all(data)
                .map_err(|e| Error::Io(format!("write {path}: {e}")))
        };
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io(format!("serialize report: {e}")))?;
        write("report.json", json.as_bytes())?;
        write("results.csv", self.results_csv().as_bytes())?;
        if !self.probes.is_empty() {
            write("traces.csv", self.traces_csv().as_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting_is_17_digits_and_crlf() {
        let row = ScatterRow {
            lambda: 1.5,
            c11: Complex64::new(1.0 / 3.0, -2.0 / 7.0),
            s11: Complex64::new(0.6, 0.8),
            rho: 0.551,
            s_dyn: Complex64::new(f64::NAN, f64::NAN),
            residual: f64::NAN,
        };
        let report = RunReport {
            config: serde_json::from_str(
                r#"{
                "system": {"mass": 1.0, "angular": 2.0, "coulomb_strength": 0.5},
                "perturbation": {"kind": "none"},
                "lambda_grid": [1.5],
                "scenario": "scatter"
            }"#,
            )
            .unwrap(),
            content_hash: "x".into(),
            scenario_passed: true,
            scatter_rows: vec![row],
            coulomb_rows: vec![],
            spectral: None,
            probes: vec![],
            deviation_identities: vec![],
            free_case: None,
            max_ergodic_residual: None,
            wall_clock_seconds: 0.0,
        };
        let csv = report.results_csv();
        assert!(csv.contains("3.3333333333333331e-1"));
        assert!(csv.contains("nan"));
        assert!(csv.lines().count() == 2);
        assert!(csv.ends_with("\r\n"));
    }
}
