use thiserror::Error;

/// Errors raised by the solver and its diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be even and at least 16")]
    InvalidGrid(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate tangent at node {index} (|z_alpha| = {value:e})")]
    DegenerateTangent { index: usize, value: f64 },

    #[error("point within {distance:e} of singular point q{index}")]
    SingularPoint { index: usize, distance: f64 },

    #[error("branch discontinuity between nodes {from} and {to} (jump {jump:.3} rad)")]
    BranchDiscontinuity { from: usize, to: usize, jump: f64 },

    #[error("mapped curve does not close: branch flips over one period")]
    BranchNotClosed,

    #[error("singular configuration: chord {chord:e} between nodes {i} and {j}")]
    SingularConfiguration { i: usize, j: usize, chord: f64 },

    #[error("target {index} at distance {distance:e} is too close to the curve")]
    TargetTooClose { index: usize, distance: f64 },

    #[error("ill-conditioned configuration: {0}")]
    IllConditioned(String),

    #[error("solvability violated: mean of data is {0:e}")]
    Solvability(f64),

    #[error("reparametrization failed: {0}")]
    Reparametrization(String),

    #[error("Rayleigh-Taylor condition violated: min Q^(2k) sigma = {min:e} at alpha = {alpha:.6}")]
    RayleighTaylorViolated { min: f64, alpha: f64 },

    #[error("quantity undefined for this variant: {0}")]
    Undefined(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O failure: {0}")]
    Io(String),

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
