use thiserror::Error;

/// Errors raised by geometry, closed-form and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gap width vanished or became negative where a positive gap is required.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// Requested quantity is not defined in the given (n, m, k) regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// A branch needs a limit-domain quantity (Q* or a11*) that was not supplied.
    #[error("{0} required")]
    MissingLimit(&'static str),

    #[error("classification unavailable: {0}")]
    Unclassifiable(String),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("profile evaluation failed: {0}")]
    Profile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
