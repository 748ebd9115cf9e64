//! Gaussian-moment dynamics of a linearly driven, damped quantum harmonic
//! oscillator, with brute-force oracles for cross-checking.

pub mod driving;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod special;

pub use driving::{DrivingProtocol, DrivingVariant};
pub use dynamics::{ComplexMoments, RealMoments, Trajectory, TrajectoryPoint};
pub use error::{Error, Result};
pub use params::{BathConstants, Model, ModelParams};
pub use num_complex::Complex64;

/// Library version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
