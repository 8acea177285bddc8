use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),

    #[error("source direction {0} rad outside the open interval (-pi/2, pi/2)")]
    InvalidDirection(f64),

    #[error("invalid ADC profile: {0}")]
    InvalidAdcProfile(String),

    #[error("quantizer input must be finite")]
    NonFiniteSample,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chain {0} has zero empirical power; cannot energy-normalize")]
    ZeroChainPower(usize),

    #[error("coverage beamformer needs at least {needed} subarrays, geometry has {got}")]
    InsufficientSubarrays { needed: usize, got: usize },

    #[error("covariance carries no identifiable source (spectrum is flat)")]
    NoIdentifiableSource,

    #[error("Fisher information for the direction is not positive")]
    NonPositiveInformation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
