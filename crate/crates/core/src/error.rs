use thiserror::Error;

/// Errors raised by the simulation, optimization and localization pipeline.
#[derive(Debug, Error)]
pub enum CelError {
    /// An argument lies outside the domain of a model equation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its documented invariant.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: need at least {needed} lines, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The normal matrix of the line bundle is too ill-conditioned to invert.
    #[error("degenerate geometry: condition number {condition:.3e} exceeds {limit:.1e}")]
    DegenerateGeometry { condition: f64, limit: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl CelError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CelError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CelError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CelError>;
