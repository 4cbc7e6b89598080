use std::path::PathBuf;
use std::time::Duration;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("noise already applied to this stack ({0})")]
    NoiseAlreadyApplied(&'static str),

    #[error("external denoiser not found: {}", .0.display())]
    DenoiserMissing(PathBuf),

    #[error("external denoiser exited with status {code:?}: {stderr}")]
    DenoiserFailed { code: Option<i32>, stderr: String },

    #[error("external denoiser timed out after {0:?}")]
    DenoiserTimeout(Duration),

    #[error("external denoiser returned {got} samples, expected {expected}")]
    DenoiserShape { expected: usize, got: usize },

    #[error("prior step failed at iteration {iteration}: {source}")]
    Prior {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {origin}: {msg}")]
    Parse { origin: String, msg: String },

    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Wraps this error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
