//! L^p moduli of continuity of Gaussian processes with stationary increments
//! and of local times of symmetric Lévy processes: spectral quantities,
//! simulation, moment oracles and a seeded verification harness.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, with `*32` variants for `f32`.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod harness;
pub mod levy;
pub mod oracles;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Exponent = spectral::CharacteristicExponent<f64>;
pub type Exponent32 = spectral::CharacteristicExponent<f32>;
pub type Tabulated = spectral::TabulatedExponent<f64>;
pub type Structure = spectral::StructureFunction<f64>;
pub type Structure32 = spectral::StructureFunction<f32>;
pub type Constants = spectral::LimitConstants<f64>;
pub type GaussPath = gaussian::GaussianPath<f64>;
pub type GaussPath32 = gaussian::GaussianPath<f32>;
pub type Rho = gaussian::RhoKernel<f64>;
pub type LevyPath = levy::SamplePath<f64>;
pub type LevyPath32 = levy::SamplePath<f32>;
pub type LocalTime = levy::LocalTimeField<f64>;
pub type LocalTime32 = levy::LocalTimeField<f32>;
pub type Query = oracles::MomentQuery<f64>;
pub type Kernel = oracles::DensityKernel<f64>;
