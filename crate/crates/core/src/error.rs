//! Shared error type.

/// Errors reported by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A label was referenced that the pmf or kernel does not carry.
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    /// Invalid argument (out-of-range parameter, inconsistent shapes, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An iterative solver hit its iteration cap; carries the best value found.
    #[error("no convergence after {iterations} iterations (best value {best})")]
    Convergence { iterations: usize, best: f64 },

    /// An enumeration would exceed the configured cap.
    #[error("enumeration too large: {0}")]
    Capacity(String),

    /// Inputs admit no usable configuration (e.g. empty typical set).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Text-format parse failure.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
