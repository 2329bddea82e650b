use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not normal (defect {0:.3e})")]
    NotNormal(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("effects do not sum to identity (defect {0:.3e})")]
    IncompletePovm(f64),

    #[error("subset scan over {n} indices exceeds the cap of {cap}")]
    SubsetCapExceeded { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polygon inequality violated: largest weight {max} exceeds half of total {total}")]
    PolygonInequality { max: f64, total: f64 },

    #[error("certificate gap {gap:.3e} exceeds the limit {limit:.3e}")]
    GapTooLarge { gap: f64, limit: f64 },

    #[error(transparent)]
    Format(#[from] crate::format::FormatError),
}
