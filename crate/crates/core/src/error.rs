use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not in SU(2) (unitarity {unitarity:e}, |det - 1| = {det:e})")]
    NotSpecialUnitary { unitarity: f64, det: f64 },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unitary t-design check only supports t = 1, got t = {0}")]
    UnsupportedDesignOrder(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no sign change of the payoff offset on [{lower}, {upper}]")]
    NoRoot { lower: f64, upper: f64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
