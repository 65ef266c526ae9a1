//! Stationary-increment Gaussian processes: simulation, the ρ_h kernel and
//! pathwise L^p moduli.

pub mod modulus;
pub mod path;
pub mod rho;

pub use modulus::{lp_modulus_gaussian, lp_modulus_squared_gaussian, lp_norm_gaussian};
pub use path::{
    increment_autocovariance, simulate_stationary_increment_path, GaussianPath, IncrementSampler, PathGrid,
};
pub use rho::{rho_double_integral, RhoKernel};
