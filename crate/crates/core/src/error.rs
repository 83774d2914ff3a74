use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma pole at z = {z}")]
    GammaPole { z: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scale function is not strictly increasing near x = {x}")]
    NotMonotone { x: f64 },

    #[error("inverse iteration did not converge for u = {u}")]
    InverseDiverged { u: f64 },

    #[error("quadrature did not converge: estimate {estimate:e} above tolerance after {nodes} nodes")]
    QuadNonConvergence { estimate: f64, nodes: usize },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
