use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge ({context}): error estimate {estimate:.3e} above target {target:.3e}")]
    Quadrature { context: String, estimate: f64, target: f64 },

    #[error("weight or trajectory may be unbounded; supply a bound, a spectral hint, or use truncated mode")]
    DivergenceRisk,

    #[error("t = {0:e} is below the point-mass threshold; the evolution reduces to the identity")]
    PointMass(f64),

    #[error("power requested on the branch cut (negative real axis): {0}")]
    BranchCut(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("trajectory does not match its tail model: {0}")]
    TailModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Numerical failures as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::Eigensolver(_) | Error::TailModel(_))
    }
}
