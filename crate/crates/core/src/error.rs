use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H^dagger| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not a projector: max |P^2 - P| = {max_defect:e}")]
    NotIdempotent { max_defect: f64 },

    #[error("state is not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid density operator: {reason}")]
    InvalidDensity { reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {dim}: must lie in [{min}, {max}]")]
    UnsupportedDimension { dim: usize, min: usize, max: usize },

    #[error("non-square matrix: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("orthogonal selection: postselection probability {probability:e} is below {threshold:e}")]
    OrthogonalSelection { probability: f64, threshold: f64 },

    #[error("degenerate second-order denominator: |D| = {denominator:e}")]
    DegenerateDenominator { denominator: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("observable is not a projector (A^2 != A)")]
    NotProjector,

    #[error("coupling {g} outside the weak regime: g * dp = {g_dp} > {limit}")]
    OutsideWeakRegime { g: f64, g_dp: f64, limit: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
