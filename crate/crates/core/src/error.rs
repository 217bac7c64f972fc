use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("function vanishes identically, cannot normalize")]
    AllZero,
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("grid too coarse: shell formula differs from direct quadrature by {rel_err:.3e} at r = {r}")]
    GridTooCoarse { r: f64, rel_err: f64 },
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("wave function is not strictly positive at r = {r} (value {value:e})")]
    NonPositivePsi { r: f64, value: f64 },
    #[error("coincident path nodes {i} and {j} with unregularized Coulomb kernel")]
    SingularPair { i: usize, j: usize },
    #[error("node {0} is the pinned node and cannot move")]
    PinnedNode(usize),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("lag {lag} exceeds the simulated time span {span}")]
    LagTooLong { lag: f64, span: f64 },
    #[error("samples were taken at different lags ({0} vs {1})")]
    LagMismatch(f64, f64),
    #[error("lattices are not related by the Brownian scaling map: {0}")]
    LatticeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
