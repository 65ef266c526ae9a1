//! Closed-form and quadrature oracles for local-time moments and limit constants.

pub mod fixtures;
pub mod kernel;
pub mod moments;

pub use fixtures::{Fixture, Fixtures};
pub use kernel::DensityKernel;
pub use moments::{
    brownian_theorem_constant, diff_second_moment_with, dirichlet_moment, fit_moment_bound, local_time_diff_second_moment,
    local_time_moment, nested_moment, simplex_integral, MomentBoundFit, MomentQuery, MAX_CONSTANT_SPREAD,
    MAX_QUADRATURE_ORDER,
};
