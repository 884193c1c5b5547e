use thiserror::Error;

/// Errors raised by the tensor kernels, matrix functions, integrators and
/// benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not agree.
    #[error("dimension mismatch{}: {detail}", mode_suffix(*.mode))]
    Dimension { mode: Option<usize>, detail: String },

    /// An argument is outside its admissible range.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A numerical procedure failed to converge or produced garbage.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The state of a time integration stopped being finite.
    #[error("integration diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    /// A method was asked to run without something it needs.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A dense reference computation was refused because it would be too large.
    #[error("refusing to assemble a dense operator of size {size} (limit {limit})")]
    TooLarge { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn mode_suffix(mode: Option<usize>) -> String {
    match mode {
        Some(m) => format!(" in mode {m}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(detail: impl Into<String>) -> Self {
        Error::Dimension {
            mode: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn dim_mode(mode: usize, detail: impl Into<String>) -> Self {
        Error::Dimension {
            mode: Some(mode),
            detail: detail.into(),
        }
    }
}
