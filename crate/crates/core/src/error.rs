//! Error type shared by all simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {msg}")]
    ConfigParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("step {step}: {source}")]
    StepFailed { step: usize, source: Box<Error> },

    #[error("x' = {0} lies outside the grid")]
    OutsideGrid(f64),

    #[error("trace not yet asymptotic: flatness {flatness:.3e} exceeds {limit:.3e}")]
    NotAsymptotic { flatness: f64, limit: f64 },

    #[error("no deviation above threshold {0:.3e} found")]
    NoDeviation(f64),

    #[error("no crossing found after t_d = {0:.6e}")]
    NoCrossing(f64),

    #[error("degenerate window: static integral is zero")]
    DegenerateWindow,

    #[error("acausal input: t_d = {t_d:.6e} does not follow perturbation start {start:.6e}")]
    AcausalInput { t_d: f64, start: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
