use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV record failed validation. `line` is 1-based and counts the header.
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("separation detected: |beta| exceeded {bound}")]
    Separation { bound: f64 },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e}, last iterate {last:?})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
        last: Vec<f64>,
    },

    #[error("{failed} of {total} bootstrap replicates failed (seeds {seeds:?})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        seeds: Vec<u64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::InvalidInput(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
