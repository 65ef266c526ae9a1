//! Symmetric Lévy paths, local-time estimates and their L^p moduli.

pub mod local_time;
pub mod modulus;
pub mod path;

pub use local_time::{default_epsilon, estimate_local_time, estimate_local_time_until, LocalTimeField};
pub use modulus::{
    lag_in_bins, lp_modulus_local_time, quadratic_variation_sum, raw_increment_sum, rhs_local_time,
    smallest_resolvable_lag,
};
pub use path::{simulate_path, simulate_stable_path, SamplePath, StableIncrements};
