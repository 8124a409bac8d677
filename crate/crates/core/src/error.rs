use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("transform length {len} exceeds the largest supported length {max}")]
    LengthOverflow { len: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("frobenius decomposition failed after {attempts} attempts")]
    DecompositionFailure { attempts: usize },
    #[error("walk length {k} is outside the index horizon 1..={mu}")]
    HorizonExceeded { k: usize, mu: usize },
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("prime product too small for exact reconstruction: {0}")]
    BoundTooSmall(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("index file: {0}")]
    IndexFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
