use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum CapError {
    /// An input violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a configured memory or size budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A numerical procedure failed to converge or produced an unusable result.
    #[error("numeric error: {msg}")]
    Numeric { msg: String, detail: Vec<f64> },

    /// Configuration or file-format problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CapError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CapError::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        CapError::Resource(msg.into())
    }

    pub fn numeric(msg: impl Into<String>, detail: Vec<f64>) -> Self {
        CapError::Numeric { msg: msg.into(), detail }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CapError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CapError>;
