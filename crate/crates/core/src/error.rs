use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("linearity violation: pair {{{0}, {1}}} is already covered by edge #{2}")]
    LinearityViolation(u32, u32, usize),
    #[error("{0:?} is not a clique of the host graph")]
    NotAClique(Vec<u32>),
    #[error("{0:?} is not available")]
    NotAvailable(Vec<u32>),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("process terminated: no available r-set remains")]
    Terminated,
    #[error("incremental state diverged from naive recomputation at step {step}: {detail}")]
    ConsistencyFailure { step: usize, detail: String },
    #[error("t = {t} is outside the trajectory domain (p = {p})")]
    OutOfDomain { t: f64, p: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("search budget of {budget} nodes exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
