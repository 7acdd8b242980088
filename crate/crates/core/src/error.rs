use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes that do not fit together.
    #[error("structural error: {0}")]
    Structure(String),

    /// A row that is not a probability vector.
    #[error("invalid probabilities: {0}")]
    Probability(String),

    /// The channel fails a regularity condition needed by the operation.
    #[error("channel not admissible: {0}")]
    NotAdmissible(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// All intensities vanish where the phase law has mass.
    #[error("zero chi-squared denominator: all intensities vanish on the phase support")]
    ZeroDenominator,

    /// Positive covert numerator with a warden that sees nothing.
    #[error("unbounded covert rate: the warden cannot observe an active covert user")]
    Unbounded,

    #[error("absolute continuity violated: {0}")]
    AbsoluteContinuity(String),

    #[error("infeasible query: {0}")]
    Infeasible(String),

    #[error("exact mixture has {pairs} codeword pairs, above the cap {cap}")]
    MixtureCap { pairs: u128, cap: u128 },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
