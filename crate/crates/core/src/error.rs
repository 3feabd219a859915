use alloc::string::String;

/// Errors raised by the core algebra and discretisations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index {index} out of range (g = {g})")]
    Index { index: usize, g: usize },
    #[error("lattice window overflow: support radius {needed} exceeds window {window}")]
    WindowOverflow { needed: i64, window: i64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("boundary values {value:e} exceed tolerance {tol:e}")]
    Boundary { value: f64, tol: f64 },
    #[error("truncation tail {value:e} exceeds tolerance {tol:e}")]
    Tail { value: f64, tol: f64 },
    #[error("problem size {size} exceeds eigensolver budget {budget}")]
    Size { size: usize, budget: usize },
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
