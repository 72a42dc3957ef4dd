use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{name}`: {reason}")]
    Validation { name: String, reason: String },

    #[error("channel plan does not fit the band edges: {0}")]
    Capacity(String),

    #[error("non-finite or non-positive power in channel {channel} at z = {z:.1} m")]
    Numerical { channel: usize, z: f64 },

    #[error("power in channel {channel} fell below {floor:e} W after span {span}")]
    PowerFloor { channel: usize, span: usize, floor: f64 },

    #[error("effective Raman fit failed: {0}")]
    FitFailure(String),

    #[error("dispersion phase vanishes for channel pair ({0}, {1})")]
    Singularity(usize, usize),

    #[error("insufficient quadrature precision: {0}")]
    Precision(String),

    #[error("frequency {0:.6e} Hz lies outside the profile support")]
    Domain(f64),

    #[error("accumulation mode: {0}")]
    Mode(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
