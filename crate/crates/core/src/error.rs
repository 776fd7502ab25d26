use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the forecasting core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand shapes disagree with what the operation requires.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },
    /// A NaN or infinity was found where finite input is required.
    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Problem with one patient's data.
    #[error("patient {patient}: {message}")]
    Data { patient: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("training diverged at epoch {epoch}, batch {batch} (loss {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    /// A pipeline stage failed; `stage` names it.
    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl core::fmt::Display,
        actual: impl core::fmt::Display,
    ) -> Self {
        Error::Shape {
            context,
            expected: alloc::format!("{expected}"),
            actual: alloc::format!("{actual}"),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wrap this error with a stage label.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
