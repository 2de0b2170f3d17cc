use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("coordinate z{index} referenced at a point of dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: index {index} exceeds dimension {dim}")]
    DimensionMismatch { line: usize, index: usize, dim: usize },
    #[error("line {line}: entry g[{i},{j}] assigned twice")]
    DuplicateEntry { line: usize, i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is not positive definite at the requested point")]
    NotPositiveDefinite,
    #[error("metric is not Hermitian at the requested point (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("point has dimension {got}, metric has dimension {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("point lies outside the metric's domain")]
    OutsideDomain,
    #[error("{quantity} has imaginary part {imag:e}; expected a real value")]
    NotReal { quantity: &'static str, imag: f64 },
    #[error("operation requires complex dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("curvature must be given in the {expected} frame")]
    WrongFrame { expected: &'static str },
    #[error("direction vector is zero")]
    ZeroVector,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
    #[error("catalog entry `{name}` failed to parse: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
}
