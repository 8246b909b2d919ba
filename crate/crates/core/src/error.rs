use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shear recovery is singular at x = {x}: denominator {denominator:e}")]
    SingularRecovery { x: f64, denominator: f64 },

    #[error("Volterra solve did not produce a finite solution at k = {k}")]
    Convergence { k: Complex64 },

    #[error("k = {k} is a zero of the Jost function to working precision (nearest zero {nearest})")]
    Pole { k: Complex64, nearest: Complex64 },

    #[error("backend inconsistency: {0}")]
    BackendInconsistency(String),

    #[error(
        "incomplete zero search in [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]: \
         argument principle counts {counted}, found {found}"
    )]
    IncompleteSearch {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
        counted: i64,
        found: usize,
    },

    #[error("data inconsistency: {0}")]
    DataInconsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("lambda = {lambda} is within {distance:e} of the cut or a pole")]
    Proximity { lambda: Complex64, distance: f64 },

    #[error("quadrature resolution: {0}")]
    QuadratureResolution(String),

    #[error("Gelfand-Levitan system is not solvable at x = {x} (condition estimate {condition:e})")]
    Solvability { x: f64, condition: f64 },

    #[error("potential extraction inconsistent at x = {x}: integrated identity off by {mismatch:e}")]
    Extraction { x: f64, mismatch: f64 },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed ({detail}): {source}")]
    Stage {
        stage: &'static str,
        detail: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str, detail: impl Into<String>) -> Error {
        Error::Stage {
            stage,
            detail: detail.into(),
            source: Box::new(self),
        }
    }
}
