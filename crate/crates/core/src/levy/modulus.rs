//! L^p moduli, their limit right-hand sides and quadratic variation of local-time fields.

use super::local_time::LocalTimeField;
use crate::error::{Error, Result};
use crate::gaussian::path::grid_steps;
use crate::scalar::{lit, Scalar};
use crate::spectral::{local_time_factor, StructureFunction};

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p >= T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("p = {p} must be ≥ 1")))
    }
}

#[inline]
fn powp<T: Scalar>(x: T, p: T) -> T {
    let x = x.abs();
    if p == lit(2.0) {
        x * x
    } else if p == T::one() {
        x
    } else {
        x.powf(p)
    }
}

/// Lag in bins, failing unless h is a positive multiple of ε.
pub fn lag_in_bins<T: Scalar>(field: &LocalTimeField<T>, h: T) -> Result<i64> {
    if !(h > T::zero()) {
        return Err(Error::domain(format!("lag h = {h} must be positive")));
    }
    let k = grid_steps(h, field.epsilon)?;
    if k == 0 {
        return Err(Error::Alignment { lag: h.to_f64_lossy(), spacing: field.epsilon.to_f64_lossy() });
    }
    Ok(k as i64)
}

/// ε · Σ_{x_j ∈ [a,b)} |ℓ(x_j+h) − ℓ(x_j)|^p without the σ₀ normalization.
pub fn raw_increment_sum<T: Scalar>(field: &LocalTimeField<T>, h: T, p: T, a: T, b: T) -> Result<T> {
    check_p(p)?;
    let k = lag_in_bins(field, h)?;
    let sum = field.bins_in(a, b)?.fold(T::zero(), |acc, j| acc + powp(field.at(j + k) - field.at(j), p));
    Ok(field.epsilon * sum)
}

/// ε · Σ_{x_j ∈ [a,b)} |ℓ(x_j+h) − ℓ(x_j)|^p / σ₀(h)^p.
pub fn lp_modulus_local_time<T: Scalar>(
    field: &LocalTimeField<T>,
    h: T,
    p: T,
    a: T,
    b: T,
    sigma0: &StructureFunction<T>,
) -> Result<T> {
    let raw = raw_increment_sum(field, h, p, a, b)?;
    Ok(raw / powp(sigma0.sigma(h)?, p))
}

/// 2^{p/2} E|η|^p · ε · Σ_{x_j ∈ [a,b)} ℓ_j^{p/2}.
pub fn rhs_local_time<T: Scalar>(field: &LocalTimeField<T>, p: T, a: T, b: T) -> Result<T> {
    check_p(p)?;
    let half = p / lit(2.0);
    let sum = field.bins_in(a, b)?.fold(T::zero(), |acc, j| {
        let v = field.at(j);
        acc + if half == T::one() { v } else { v.powf(half) }
    });
    Ok(local_time_factor(p)? * field.epsilon * sum)
}

/// Σ_j (ℓ(j/m) − ℓ((j−1)/m))² over every j whose terms can be nonzero.
pub fn quadratic_variation_sum<T: Scalar>(field: &LocalTimeField<T>, m: T) -> Result<T> {
    if !(m > T::zero()) {
        return Err(Error::domain(format!("m = {m} must be positive")));
    }
    let k = lag_in_bins(field, T::one() / m)?;
    let lo = field.first_bin.div_euclid(k);
    let hi = field.last_bin().div_euclid(k) + 1;
    let mut sum = T::zero();
    for i in lo..=hi {
        let d = field.at(i * k) - field.at((i - 1) * k);
        sum = sum + d * d;
    }
    Ok(sum)
}

/// Smallest lag h = 2^k ε whose bin-averaging bias is at most `max_bias`.
///
/// Averaging ℓ over bins of width ε smooths the increments; for σ₀² ∝ h^r,
/// r = β − 1, the relative deficit of the p = 2 modulus is about
/// 2(ε/h)^r/((r+1)(r+2)).
pub fn smallest_resolvable_lag(epsilon: f64, beta: f64, max_bias: f64) -> f64 {
    let r = beta - 1.0;
    let c = 2.0 / ((r + 1.0) * (r + 2.0));
    let mut h = epsilon;
    while c * (epsilon / h).powf(r) > max_bias {
        h *= 2.0;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field(values: Vec<f64>, first_bin: i64, eps: f64) -> LocalTimeField<f64> {
        LocalTimeField { epsilon: eps, first_bin, values, t: 1.0, resolution_warning: false }
    }

    #[test]
    fn modulus_examples() {
        let unit = StructureFunction::closed_form_stable(2.0).unwrap();
        let bump = field(vec![0.0, 1.0, 0.0], -1, 1.0);
        assert_relative_eq!(lp_modulus_local_time(&bump, 1.0, 2.0, -1.0, 1.0, &unit).unwrap(), 2.0);
        let flat = field(vec![3.0; 10], -5, 0.5);
        assert_eq!(lp_modulus_local_time(&flat, 0.5, 2.0, -2.0, 1.0, &unit).unwrap(), 0.0);
        assert!(matches!(lp_modulus_local_time(&flat, 0.3, 2.0, -2.0, 1.0, &unit), Err(Error::Alignment { .. })));
    }

    #[test]
    fn rhs_examples() {
        let zero = field(vec![0.0; 4], 0, 0.25);
        assert_eq!(rhs_local_time(&zero, 2.0, 0.0, 1.0).unwrap(), 0.0);
        let ones = field(vec![1.0; 4], 0, 0.25);
        assert_relative_eq!(rhs_local_time(&ones, 2.0, 0.0, 1.0).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn full_line_rhs_is_twice_the_mass() {
        let f = field(vec![0.5, 2.0, 1.5, 0.0, 0.25], -2, 0.2);
        let (a, b) = f.full_line_window(0.2);
        assert_relative_eq!(rhs_local_time(&f, 2.0, a, b).unwrap(), 2.0 * f.total_mass(), max_relative = 1e-14);
    }

    #[test]
    fn quadratic_variation_examples() {
        assert_eq!(quadratic_variation_sum(&field(vec![0.0; 5], -2, 1.0), 1.0).unwrap(), 0.0);
        assert_eq!(quadratic_variation_sum(&field(vec![0.0, 1.0, 0.0], -1, 1.0), 1.0).unwrap(), 2.0);
        // coarser spacing samples every second bin
        let f = field(vec![1.0, 5.0, 2.0, 7.0, 3.0], 0, 0.5);
        // points 0, 1, 2 → ℓ = 1, 2, 3, with zeros beyond
        assert_eq!(quadratic_variation_sum(&f, 1.0).unwrap(), 1.0 + 1.0 + 1.0 + 9.0);
        assert!(quadratic_variation_sum(&f, 3.0).is_err());
    }

    #[test]
    fn resolvable_lags() {
        let e = 2f64.powi(-8);
        assert_eq!(smallest_resolvable_lag(e, 2.0, 0.05), 8.0 * e);
        assert_eq!(smallest_resolvable_lag(e, 1.5, 0.05), 128.0 * e);
    }
}
