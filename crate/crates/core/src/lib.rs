//! DOA estimation for sub-connected hybrid analog/digital uniform linear
//! arrays whose RF chains mix high- and low-resolution ADCs.
//!
//! The crate covers the whole receive chain at desk scale: array manifold
//! and subarray geometry ([`array`]), AQNM-linearized scalar quantization
//! ([`quantizer`]), analog/digital beamforming ([`beamformer`]), snapshot
//! synthesis ([`synth`]), the single-time-block root-MUSIC estimator
//! ([`estimator`]), closed-form and numerical Fisher-information bounds
//! ([`crlb`]), and the receiver power/energy-efficiency model ([`energy`]).
//!
//! Angles are carried in radians internally; the wavelength convention is
//! λ = 1 with antenna spacing expressed in wavelengths.

pub mod array;
pub mod beamformer;
pub mod crlb;
pub mod energy;
pub mod error;
pub mod estimator;
pub mod quantizer;
pub mod synth;

pub use array::ArrayGeometry;
pub use beamformer::{AnalogBeamformer, DigitalCombiner};
pub use crlb::FisherReport;
pub use energy::{PowerBudget, PowerModel};
pub use error::Error;
pub use estimator::StbRootMusic;
pub use quantizer::AdcProfile;
pub use synth::{SnapshotBlock, SourceTruth};

/// Convenience alias used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
