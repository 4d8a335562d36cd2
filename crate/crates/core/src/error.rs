use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contour tail sum diverges: beta = {beta} must exceed ln(2d-1) = {threshold}")]
    DivergentTail { beta: f64, threshold: f64 },

    #[error("beta* bracket [{lo}, {hi}] is wider than the requested tolerance {tolerance}; increase L_max")]
    BracketTooWide { lo: f64, hi: f64, tolerance: f64 },

    #[error("{quantity} out of domain: {requirement}")]
    OutOfDomain {
        quantity: &'static str,
        requirement: String,
    },

    #[error(
        "possible backward percolation: clan budget exceeded \
         ({cylinders} cylinders, depth {depth}, limits {max_cylinders}/{max_depth})"
    )]
    Budget {
        cylinders: usize,
        depth: usize,
        max_cylinders: usize,
        max_depth: usize,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("state space too large: {0}")]
    StateSpace(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
