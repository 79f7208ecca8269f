use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyShape,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("data length {found} does not match a {rows}x{cols} matrix")]
    DataLength { rows: usize, cols: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular for the convolution product: a00 = {a00}")]
    Singular { a00: String },
    #[error("{function} is not defined at {point}")]
    Domain { function: String, point: String },
    #[error("{function} provides derivatives up to order {available}, order {required} needed")]
    DerivativeOrder { function: String, required: usize, available: usize },
    #[error("{function} cannot be evaluated exactly on the {backend} backend")]
    NotExact { function: String, backend: &'static str },
    #[error("more than {limit} partitions requested")]
    PartitionLimit { limit: usize },
    #[error("series did not converge within {terms} terms")]
    Divergence { terms: usize },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("Bruhat oracle supports n <= {max}, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
