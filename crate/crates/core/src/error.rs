use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numeric parameter is outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input sample exceeds the encoder range.
    #[error("value {value} at index {index} exceeds encoder range ±{x_max}")]
    Range { index: usize, value: f64, x_max: f64 },

    /// A spike lies outside the stage window it claims to belong to.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// A neuron reached threshold before its silent stage ended.
    #[error("neuron {neuron} reached threshold during the silent stage at step {step}")]
    PrematureSpike { neuron: usize, step: u32 },

    /// Transform size is not supported by the requested architecture.
    #[error("size error: {0}")]
    Size(String),

    /// Threshold mode does not apply to the given weights.
    #[error("mode error: {0}")]
    Mode(String),

    /// The hardware voltage range cannot hold the layer threshold.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("format error: {0}")]
    Format(String),

    /// Caller supplied inconsistent or unknown arguments.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
