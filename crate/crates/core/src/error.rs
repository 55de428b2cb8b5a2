use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed, or unsupported. `key` names
    /// the offending configuration key (or parameter).
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    /// A deformation (or another map) sends points outside the latent space.
    #[error("domain error: {0}")]
    Domain(String),

    /// The random graph model violates one of its declared bounds.
    #[error("model error: {0}")]
    Model(String),

    /// An estimate was requested that cannot be computed from the available
    /// information (for instance a density ratio without a declared density).
    #[error("unsupported estimate: {0}")]
    UnsupportedEstimate(String),

    /// A reference sample produced an empirical degree under the floor `c_min / 2`.
    #[error("sampling failure: empirical degree {degree:.6e} at reference point {index} is below the floor {floor:.6e}")]
    SamplingFailure { index: usize, degree: f64, floor: f64 },

    /// Out-of-sample extension failed because the query degree is under the floor.
    #[error("extension error: degree {degree:.6e} at query point {index} is below the floor {floor:.6e}")]
    Extension { index: usize, degree: f64, floor: f64 },

    #[error("{what}: size {size} exceeds the cap {cap}; {advice}")]
    TooLarge { what: String, size: usize, cap: usize, advice: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape { expected: expected.to_string(), found: found.to_string() }
    }
}
