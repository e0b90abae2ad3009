use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("transmit radius {radius} is not larger than half a wavelength ({half_lambda})")]
    TransmitRadiusTooSmall { radius: f64, half_lambda: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("receive plane must be at z > 0, got {0}")]
    NonPositiveDistance(f64),

    #[error("zero gain on active mode {mode}")]
    ZeroGain { mode: usize },

    #[error("detection needs a finite constellation")]
    UnsupportedConstellation,

    #[error("BER average needs exactly {expected} modes, got {actual}")]
    ModeCountMismatch { expected: usize, actual: usize },

    #[error("malformed input{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    MalformedInput {
        line: Option<usize>,
        message: String,
    },

    #[error("invalid config `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn malformed(line: impl Into<Option<usize>>, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            line: line.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}
