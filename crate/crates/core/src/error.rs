use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("input vector is numerically zero")]
    ZeroVector,

    #[error("requested cardinality {m} exceeds ambient dimension {n}")]
    CardinalityTooLarge { m: usize, n: usize },

    #[error("infeasible instance sizes: {0}")]
    InfeasibleSizes(String),

    #[error("keep set is not a subset of the corruption support")]
    KeepNotSubset,

    #[error("infeasible golfing plan: {0}")]
    InfeasiblePlan(String),

    #[error("gram system numerically singular (condition estimate {cond:.3e})")]
    SingularGram { cond: f64 },

    #[error("linear system infeasible: {0}")]
    Infeasible(String),

    #[error("iterative solver stalled before reaching tolerance {tol:.3e} (best gap {gap:.3e})")]
    SolverStall { tol: f64, gap: f64 },

    #[error("dense path limited to n <= {max}, got {n}")]
    SizeTooLarge { n: usize, max: usize },

    #[error("audit ensemble is empty")]
    EmptyEnsemble,

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
