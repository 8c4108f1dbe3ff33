use thiserror::Error;

/// Errors produced by graph construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible degree: {0}")]
    InfeasibleDegree(String),

    #[error("random regular sampler gave up after {0} restarts")]
    RetryExhausted(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is not {d}-regular: vertex {vertex} has degree {degree}")]
    NotRegular { d: usize, vertex: usize, degree: usize },

    #[error("missing or malformed labels: {0}")]
    MissingLabels(String),

    #[error("eigensolver failed to converge on a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("subgraph has no vertices")]
    EmptySubgraph,

    #[error("connection policy infeasible: {0}")]
    PolicyInfeasible(String),

    #[error("no degenerate eigenvalue cluster in window [{lo}, {hi}]")]
    NoDegeneracy { lo: f64, hi: f64 },

    #[error("graph too large for exact enumeration: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },

    #[error("unknown bit index {index}: product has {bits} QL bits")]
    UnknownBit { index: usize, bits: usize },

    #[error("ambiguous witness readout: projections {x1:.3e} and {x2:.3e} below threshold")]
    AmbiguousReadout { x1: f64, x2: f64 },

    #[error("integrator unstable at t = {t}: |dtheta/dt| * dt = {excursion:.3} exceeds pi")]
    Unstable { t: f64, excursion: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
