use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the spectral computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed to converge for indices {indices:?}")]
    EigenNonConvergence { indices: Vec<usize> },

    #[error("ODE integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last}, residual {residual:e})")]
    NewtonDivergence {
        last: Complex64,
        residual: f64,
        iterations: usize,
    },

    #[error("derivative vanishes near {lambda} (|dF| = {abs_derivative:e}); possible multiple eigenvalue")]
    NearCritical { lambda: Complex64, abs_derivative: f64 },

    #[error("lambda = {lambda} lies within {distance:e} of the pole {pole}")]
    PoleProximity {
        lambda: Complex64,
        pole: f64,
        distance: f64,
    },

    #[error("fixed-point iteration did not contract: {0}")]
    FixedPoint(String),

    #[error("eigenvalue {lambda} of the operator has no conjugate partner in the adjoint spectrum (closest distance {distance:e})")]
    AdjointMismatch { lambda: Complex64, distance: f64 },

    #[error("eigenvalue for label {label} at t = {t} is not simple")]
    NotSimple { label: i32, t: f64 },

    #[error("arc tracing for label {label} failed at t = {t}: {reason} ({} samples kept)", samples.len())]
    ArcTracing {
        label: i32,
        t: f64,
        reason: String,
        /// `(t, λ)` samples traced before the failure.
        samples: Vec<(f64, Complex64)>,
    },

    #[error("pairing failed at t = {t}: {source}")]
    Pairing { t: f64, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::EigenNonConvergence { .. } => "eigen_non_convergence",
            Error::Integration { .. } => "integration",
            Error::NewtonDivergence { .. } => "newton_divergence",
            Error::NearCritical { .. } => "near_critical",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::FixedPoint(_) => "fixed_point",
            Error::AdjointMismatch { .. } => "adjoint_mismatch",
            Error::NotSimple { .. } => "not_simple",
            Error::ArcTracing { .. } => "arc_tracing",
            Error::Pairing { .. } => "pairing",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
