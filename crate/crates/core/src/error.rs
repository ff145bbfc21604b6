use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate domain: {0}")]
    Degenerate(String),

    #[error("feature size: mesh size h = {h} cannot resolve a feature of width {feature}")]
    FeatureSize { h: f64, feature: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {iterations} restarts (worst relative residual {achieved:.3e})")]
    NotConverged { iterations: usize, achieved: f64 },

    #[error("insufficient spectrum: largest usable lambda is {largest}")]
    InsufficientSpectrum { largest: f64 },

    #[error("grid convergence failure: {0}")]
    GridConvergence(String),

    #[error("check refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
