use thiserror::Error;

use crate::norms::InhomogeneousFailure;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("points per axis must be a power of two >= 8, got {0}")]
    InvalidPoints(usize),
    #[error("box length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("Lamé constants violate ellipticity (mu = {mu}, lambda + 2 mu = {p_modulus})")]
    NotElliptic { mu: f64, p_modulus: f64 },
    #[error("field is in {found} space, operation expects {expected} space")]
    WrongSpace {
        expected: &'static str,
        found: &'static str,
    },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("field storage has length {found}, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("vector is not unit length (|omega| = {0})")]
    NotUnit(f64),
    #[error("direction outside the {branch} cap (omega . pole = {dot})")]
    OutsideBranch { branch: &'static str, dot: f64 },
    #[error("zero frequency has no direction")]
    ZeroFrequency,
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("exponent out of range: {0}")]
    InvalidExponent(String),
    #[error("negative-order Sobolev norm requested for a field with nonzero mean ({0:e})")]
    NonzeroMean(f64),
    #[error("negative weight {0} at site {1}")]
    NegativeWeight(f64, usize),
    #[error("time mesh error: {0}")]
    TimeMesh(String),
    #[error("multiplier is not finite at site {0}")]
    NonFiniteMultiplier(usize),
    #[error("Picard iteration did not converge in {} iterations (last residual {:e})", .trace.len(), .trace.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { trace: Vec<f64> },
    #[error("resolvent symbol within floor {floor:e} of singular at tau = {tau}, xi = {xi:?} (distance {distance:e})")]
    SingularityFloor {
        floor: f64,
        distance: f64,
        tau: f64,
        xi: Vec<f64>,
    },
    #[error("inhomogeneous conditions fail: {}", join_reasons(.0))]
    Conditions(Vec<InhomogeneousFailure>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window exceeds wraparound time: {0}")]
    Wraparound(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("bad snapshot: {0}")]
    Snapshot(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_reasons(reasons: &[InhomogeneousFailure]) -> String {
    reasons.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("; ")
}
