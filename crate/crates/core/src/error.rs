use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} out of range (expected 1..={max})", max = crate::MAX_DIM)]
    DimensionOutOfRange(usize),

    #[error("points per axis {0} must be a power of two and at least 8")]
    BadResolution(usize),

    #[error("grid mismatch: field lives on n={found_n}, N={found_pts}, expected n={want_n}, N={want_pts}")]
    GridMismatch {
        want_n: usize,
        want_pts: usize,
        found_n: usize,
        found_pts: usize,
    },

    #[error("derivative order has length {got}, expected {want}")]
    OrderLength { got: usize, want: usize },

    #[error("total derivative order {0} exceeds 3")]
    OrderTooHigh(usize),

    #[error("field has {got} samples, grid expects {want}")]
    FieldLength { got: usize, want: usize },

    #[error("non-finite value in field")]
    NonFinite,

    #[error("matrix size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("matrix is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),

    #[error("safety factor {0} must lie in (0, 1]")]
    BadSafety(f64),

    #[error("step size {0} must be positive and finite")]
    BadStep(f64),

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("eigenvalues {lambda:?} violate the concavity region (lambda_k * lambda_l = {product} <= -1)")]
    RegionViolated { lambda: Vec<f64>, product: f64 },

    #[error(
        "not a unitary block: |PP^T + QQ^T - I| = {orthogonality:e}, |QP^T - PQ^T| = {symmetry:e}"
    )]
    NotUnitary { orthogonality: f64, symmetry: f64 },

    #[error("unknown diagnostics field `{0}`")]
    UnknownField(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
