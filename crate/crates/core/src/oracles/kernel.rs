//! Transition densities p_s(x) for the oracles, closed form where one exists.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::special::gamma;
use crate::spectral::{transition_density, CharacteristicExponent};

/// Source of p_s(x) values.
#[derive(Debug, Clone)]
pub struct DensityKernel<T> {
    exponent: CharacteristicExponent<T>,
    tol: T,
    closed: bool,
}

impl<T: Scalar> DensityKernel<T> {
    /// Closed forms for the Gaussian case and for p_s(0) of stable families,
    /// spectral inversion otherwise.
    pub fn new(exponent: CharacteristicExponent<T>, tol: T) -> Result<Self> {
        Self::build(exponent, tol, true)
    }

    /// Every value by numerical Fourier inversion of exp(−sψ).
    pub fn spectral(exponent: CharacteristicExponent<T>, tol: T) -> Result<Self> {
        Self::build(exponent, tol, false)
    }

    fn build(exponent: CharacteristicExponent<T>, tol: T, closed: bool) -> Result<Self> {
        if exponent.tail_exponent() <= T::one() {
            return Err(Error::domain("ψ must grow faster than |λ| for local times to exist"));
        }
        Ok(Self { exponent, tol, closed })
    }

    pub fn exponent(&self) -> &CharacteristicExponent<T> {
        &self.exponent
    }

    pub fn is_spectral(&self) -> bool {
        !self.closed
    }

    /// Growth exponent γ of ψ, which fixes the small-time singularity s^{−1/γ}.
    pub fn gamma(&self) -> T {
        self.exponent.tail_exponent()
    }

    pub fn p(&self, s: T, x: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::domain(format!("density needs s > 0, got {s}")));
        }
        if self.closed {
            if let Some((c, beta)) = self.exponent.stable_view() {
                if beta == lit(2.0) {
                    // N(0, 2cs)
                    let v = lit::<T>(2.0) * c * s;
                    return Ok((-x * x / (lit::<T>(2.0) * v)).exp() / (T::TAU() * v).sqrt());
                }
                if x == T::zero() {
                    return Ok(gamma(T::one() + beta.recip()) / (T::PI() * (c * s).powf(beta.recip())));
                }
            }
        }
        transition_density(&self.exponent, s, x, self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_match_spectral() {
        for exp in [
            CharacteristicExponent::brownian_half(),
            CharacteristicExponent::canonical_stable(2.0).unwrap(),
            CharacteristicExponent::canonical_stable(1.5).unwrap(),
            CharacteristicExponent::scaled_stable(0.7, 1.3).unwrap(),
        ] {
            let closed = DensityKernel::new(exp.clone(), 1e-11).unwrap();
            let spec = DensityKernel::spectral(exp, 1e-11).unwrap();
            for (s, x) in [(1.0, 0.0), (0.3, 0.0), (2.5, 0.4), (0.01, 0.05)] {
                assert_relative_eq!(closed.p(s, x).unwrap(), spec.p(s, x).unwrap(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn brownian_value() {
        let k = DensityKernel::new(CharacteristicExponent::<f64>::brownian_half(), 1e-10).unwrap();
        assert_relative_eq!(k.p(1.0, 0.0).unwrap(), 0.398942280401433, max_relative = 1e-14);
        assert!(k.p(0.0, 0.0).is_err());
    }
}
