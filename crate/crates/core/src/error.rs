use thiserror::Error;

/// Errors surfaced by the solvers, transforms and configuration layer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("gamma function pole at or near {0} (non-positive integer)")]
    Pole(String),
    #[error("degenerate confluent parameter: {0}")]
    DegenerateParameter(String),
    #[error("series/asymptotic evaluation did not converge: {0}")]
    NonConvergence(String),
    #[error("requested tolerance unreachable in asymptotic regime: {0}")]
    InsufficientDecay(String),
    #[error("energy {lambda} inside the spectral gap |lambda| <= {threshold}")]
    SpectralGap { lambda: f64, threshold: f64 },
    #[error("irregular-solution scale relation degenerated: {0}")]
    DegenerateScale(String),
    #[error("perturbation tail cannot be truncated on the grid: {0}")]
    TailTruncation(String),
    #[error("asymptotic fit failed: {0}")]
    Fit(String),
    #[error("extracted coefficient vectors violate conjugacy: |C2 - conj C1| = {0:e}")]
    ConjugacyViolation(f64),
    #[error("asymptotic coefficient too small: |c11| = {0:e}")]
    ZeroCoefficient(f64),
    #[error("quadrature cannot resolve the integrand: {0}")]
    Quadrature(String),
    #[error("truncated integral tail too large: {0}")]
    Truncation(String),
    #[error("time oscillation e^{{i t u}} unresolved by panel budget: {0}")]
    OscillationResolution(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
