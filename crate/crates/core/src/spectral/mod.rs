//! Characteristic exponents and the spectral quantities built from them.

pub mod conditions;
pub mod constants;
pub mod exponent;
pub mod integrals;
pub mod structure;

pub use conditions::{
    check_concavity, check_condition_cq, check_condition_lambda_gamma, ConcavityReport, Thresholds, TrendPoint,
    TrendReport, Verdict,
};
pub use constants::{
    abs_moment_normal, c_beta_p, local_time_factor, local_time_factor_gamma_form, squared_process_factor,
    LimitConstants,
};
pub use exponent::{CharacteristicExponent, TabulatedExponent};
pub use integrals::{
    sigma0_sq, sigma0_sq_stable_closed, sigma_alpha_sq, sigma_tilde_sq, transition_density, u_alpha, v_of_t,
    v_of_t_quadrature, DEFAULT_TOL,
};
pub use structure::{LogDomainFn, Source, StructureFunction};
