use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    InvalidArch(String),

    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("invalid failure curve: {0}")]
    InvalidCurve(String),

    #[error("invalid memory layout: {0}")]
    InvalidLayout(String),

    #[error("invalid power parameters: {0}")]
    InvalidPowerParams(String),

    #[error("invalid device parameters: {0}")]
    InvalidDevice(String),

    #[error("baseline {component} power is zero")]
    ZeroBaseline { component: &'static str },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
