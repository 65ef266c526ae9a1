//! Gaussian absolute moments and the limit constants of the local-time moduli.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::special::gamma;

/// E|η|^p for η ~ N(0, 1): 2^{p/2} Γ((p+1)/2)/√π.
pub fn abs_moment_normal<T: Scalar>(p: T) -> Result<T> {
    if !(p >= T::zero()) || !p.is_finite() {
        return Err(Error::domain(format!("absolute moment order p = {p} must be ≥ 0")));
    }
    // integer orders: (p−1)!! for even p, √(2/π)(p−1)!! for odd p
    if p.fract() == T::zero() && p <= lit(100.0) {
        let k = p.to_u32().unwrap_or(0);
        let mut acc = T::one();
        let mut j = k as i64 - 1;
        while j > 1 {
            acc = acc * lit(j as f64);
            j -= 2;
        }
        if k % 2 == 1 {
            acc = acc * (lit::<T>(2.0) / T::PI()).sqrt();
        }
        return Ok(acc);
    }
    let two = lit::<T>(2.0);
    Ok(two.powf(p / two) * gamma((p + T::one()) / two) / T::PI().sqrt())
}

/// 2^{p/2} E|η|^p, the constant multiplying ∫|L|^{p/2} in the local-time limit.
pub fn local_time_factor<T: Scalar>(p: T) -> Result<T> {
    let two = lit::<T>(2.0);
    Ok(two.powf(p / two) * abs_moment_normal(p)?)
}

/// The same constant in the form 2^p Γ((p+1)/2)/√π.
pub fn local_time_factor_gamma_form<T: Scalar>(p: T) -> Result<T> {
    if !(p >= T::zero()) {
        return Err(Error::domain(format!("p = {p} must be ≥ 0")));
    }
    let two = lit::<T>(2.0);
    Ok(two.powf(p) * gamma((p + T::one()) / two) / T::PI().sqrt())
}

/// Constant of the squared-process modulus: the increments of G² behave like
/// 2G·ΔG, so the limit of ∫|ΔG²|^p/σ^p is 2^p E|η|^p ∫|G|^p.
pub fn squared_process_factor<T: Scalar>(p: T) -> Result<T> {
    Ok(lit::<T>(2.0).powf(p) * abs_moment_normal(p)?)
}

/// c(β, p) = (1/(Γ(β) sin(π(β−1)/2)))^{p/2} · 2^p Γ((p+1)/2)/√π.
pub fn c_beta_p<T: Scalar>(beta: T, p: T) -> Result<T> {
    if !(beta > T::one() && beta <= lit(2.0)) {
        return Err(Error::domain(format!("β = {beta} must lie in (1, 2]")));
    }
    if !(p >= T::one()) {
        return Err(Error::domain(format!("p = {p} must be ≥ 1")));
    }
    let b1 = beta - T::one();
    let norm = T::one() / (gamma(beta) * (T::FRAC_PI_2() * b1).sin());
    Ok(norm.powf(p / lit(2.0)) * local_time_factor_gamma_form(p)?)
}

/// Constants attached to a given p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConstants<T> {
    pub p: T,
    pub abs_moment: T,
    pub local_time_factor: T,
    pub stable_factor: Option<T>,
}

impl<T: Scalar> LimitConstants<T> {
    pub fn new(p: T, beta: Option<T>) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::domain(format!("p = {p} must be ≥ 1")));
        }
        Ok(Self {
            p,
            abs_moment: abs_moment_normal(p)?,
            local_time_factor: local_time_factor(p)?,
            stable_factor: beta.map(|b| c_beta_p(b, p)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_semi_infinite, QuadOptions};
    use approx::assert_relative_eq;

    #[test]
    fn normal_moments() {
        assert_relative_eq!(abs_moment_normal(2.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(abs_moment_normal(1.0).unwrap(), 0.797884560802865, max_relative = 1e-14);
        assert_relative_eq!(abs_moment_normal(4.0).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(abs_moment_normal(0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(abs_moment_normal(-1.0).is_err());
    }

    #[test]
    fn normal_moments_against_quadrature() {
        let o = QuadOptions::new(1e-12);
        let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for p in [1.0, 2.5, 4.0] {
            let q = 2.0 * integrate_semi_infinite(|x: f64| x.powf(p) * phi(x), 0.0, 1.0, &o).unwrap().value;
            assert_relative_eq!(abs_moment_normal(p).unwrap(), q, max_relative = 1e-10);
        }
    }

    #[test]
    fn duplication_identity() {
        for p in [0.0, 1.0, 2.0, 3.0] {
            let lhs = abs_moment_normal(p + 2.0).unwrap();
            assert_relative_eq!(lhs, (p + 1.0) * abs_moment_normal(p).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn factor_forms_agree() {
        for p in [1.0, 2.0, 3.0, 4.0] {
            assert_relative_eq!(
                local_time_factor(p).unwrap(),
                local_time_factor_gamma_form(p).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn stable_constant() {
        assert_relative_eq!(c_beta_p(2.0, 2.0).unwrap(), 2.0, max_relative = 1e-13);
        assert_relative_eq!(c_beta_p(2.0, 1.0).unwrap(), std::f64::consts::FRAC_2_SQRT_PI, max_relative = 1e-13);
        assert!(c_beta_p(1.0, 2.0).is_err());
        assert!(c_beta_p(1.5, 0.5).is_err());
        // Brownian constant is c(2, p) rescaled by σ₀² = 2h
        for p in [1.0, 2.0, 3.0] {
            let brownian = 2f64.powf(1.5 * p) * crate::special::gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
            assert_relative_eq!(c_beta_p(2.0, p).unwrap() * 2f64.powf(p / 2.0), brownian, max_relative = 1e-12);
        }
    }

    #[test]
    fn limit_constants_bundle() {
        let c = LimitConstants::new(2.0, Some(1.5)).unwrap();
        assert_eq!(c.abs_moment, abs_moment_normal(2.0).unwrap());
        assert_relative_eq!(c.local_time_factor, 2.0, max_relative = 1e-14);
        assert!(c.stable_factor.is_some());
        assert!(LimitConstants::new(0.5, None).is_err());
    }
}
