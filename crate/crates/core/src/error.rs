use thiserror::Error;

/// Errors raised by the model, statistics, asymptotics and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    /// |θ| ≥ 1 or |ρ| ≥ 1.
    #[error("unstable parameters: {0}")]
    Stability(String),

    /// A value lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sum used as a denominator vanished (e.g. an all-zero path).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Γ or A is not invertible, which happens exactly when θ = −ρ.
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid user input rather than I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Stability(_) | Error::Domain(_) | Error::Singular(_) | Error::Parse(_)
        )
    }
}
