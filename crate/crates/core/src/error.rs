use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time {value} is not on the sampling lattice (step {step})")]
    OffLattice { value: f64, step: f64 },

    #[error("time {value} lies outside the grid [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("susceptibility pole on the real axis (zero dephasing at exact resonance)")]
    PoleOnRealAxis,

    #[error("amplitude is not normalized: sum |phi|^2 dw^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
