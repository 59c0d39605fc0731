use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("not strongly connected after budget: {attempts} samples of G({n}, {p}) rejected")]
    RejectionBudget { n: usize, p: f64, attempts: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("weight balancing did not reach tolerance within {iterations} iterations (last step {last_step:e})")]
    BalanceNotConverged {
        iterations: usize,
        last_step: f64,
        residual_history: Vec<f64>,
    },

    #[error("weights do not balance the graph (relative residual {residual:e})")]
    NotBalanced { residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parameter validation failed: {0}")]
    Params(String),

    #[error("non-finite agent state at step {step}")]
    NonFinite { step: u64 },

    #[error("bound system went negative (gamma = {gamma:e}) at step {step}")]
    NegativeGamma { step: u64, gamma: f64 },

    #[error("rate fit needs at least {min} rows, record has {rows}")]
    TooFewRows { rows: usize, min: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for problems in the inputs (as opposed to runtime divergence or I/O).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGraph(_)
                | Error::NotStronglyConnected
                | Error::RejectionBudget { .. }
                | Error::Dimension { .. }
                | Error::NotBalanced { .. }
                | Error::Config(_)
                | Error::Params(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::NegativeGamma { .. }
                | Error::BalanceNotConverged { .. }
                | Error::EigenNotConverged { .. }
        )
    }
}
