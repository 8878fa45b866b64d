use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("tone already carries an AOM detuning ({0})")]
    AlreadyDetuned(String),

    #[error("sample rate {sample_rate} Hz is below 8x the highest beat frequency {beat_hz} Hz")]
    Nyquist { sample_rate: f64, beat_hz: f64 },

    #[error("filter window of {window} samples is longer than the trace ({len} samples)")]
    WindowTooLong { window: usize, len: usize },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("trace grids differ")]
    GridMismatch,

    #[error("operation needs analyzers on both output ports")]
    MissingAnalyzers,

    #[error("operation needs the {expected} combiner")]
    WrongCombiner { expected: &'static str },

    #[error("tone structure differs from the reference form: {}", .0.join("; "))]
    FormMismatch(Vec<String>),

    #[error("fringe fit: {0}")]
    Fit(String),

    #[error("degenerate correlation surface: zero normalization at ({xi}, {theta})")]
    DegenerateSurface { xi: f64, theta: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
