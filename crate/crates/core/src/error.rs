use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported dimension m = {0}")]
    UnsupportedDimension(usize),

    #[error("grade {grade} out of range for m = {dim}")]
    GradeOutOfRange { grade: usize, dim: usize },

    #[error("expected a grade-1 multivector")]
    NotAVector,

    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("polynomial depends on variable group {0:?}, which is not allowed here")]
    GroupNotAllowed(crate::poly::VariableGroup),

    #[error("argument is not in {space}: residual {residual:.3e}")]
    NotInSpace { space: &'static str, residual: f64 },

    #[error("linear system is ill-conditioned (condition {condition:.3e}, residual {residual:.3e})")]
    IllConditioned { condition: f64, residual: f64 },

    #[error("kernel evaluated at distance {0:.3e} from its singularity")]
    Singular(f64),

    #[error("non-finite integrand value at quadrature node {0}")]
    NonFinite(usize),

    #[error("no calibrated constant for (m = {m}, k = {k}, j = {j}); run the calibration first")]
    Uncalibrated { m: usize, k: usize, j: usize },

    #[error("degenerate calibration batch: {0}")]
    DegenerateBatch(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
