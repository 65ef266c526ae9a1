//! Structure functions σ²(h) = E(G(x+h) − G(x))².

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::exponent::CharacteristicExponent;
use super::integrals::{sigma0_sq, sigma0_sq_stable_closed, sigma_alpha_sq, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// σ² as a function of ln h.
pub type LogDomainFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Where the values of a [`StructureFunction`] come from.
#[derive(Clone)]
pub enum Source<T> {
    /// σ₀² (α = 0) or σ_α² (α > 0) of a characteristic exponent.
    Spectral { exponent: CharacteristicExponent<T>, alpha: T },
    /// σ²(h) = scale·h^r with 0 < r < 2.
    PowerLaw { scale: T, r: T },
    /// The closed form of σ₀² for ψ = |λ|^β.
    ClosedFormStable { beta: T },
    /// Arbitrary σ² given as a function of ln h, so that h far below the
    /// floating-point range can be probed.
    Custom { name: String, of_ln_h: LogDomainFn<T> },
}

impl<T: Scalar> fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Spectral { exponent, alpha } => {
                f.debug_struct("Spectral").field("exponent", exponent).field("alpha", alpha).finish()
            }
            Source::PowerLaw { scale, r } => f.debug_struct("PowerLaw").field("scale", scale).field("r", r).finish(),
            Source::ClosedFormStable { beta } => f.debug_struct("ClosedFormStable").field("beta", beta).finish(),
            Source::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// Evaluator of σ²(h) with a shared cache of computed values.
///
/// Clones share the cache. Safe to evaluate from many threads.
#[derive(Clone)]
pub struct StructureFunction<T> {
    source: Source<T>,
    tol: T,
    delta: T,
    concave: bool,
    cache: Arc<RwLock<HashMap<u64, T>>>,
}

impl<T: Scalar> fmt::Debug for StructureFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureFunction")
            .field("source", &self.source)
            .field("tol", &self.tol)
            .field("delta", &self.delta)
            .field("concave", &self.concave)
            .finish()
    }
}

impl<T: Scalar> StructureFunction<T> {
    fn build(source: Source<T>, tol: T, concave: bool) -> Self {
        Self { source, tol: T::clamp_tol(tol), delta: T::one(), concave, cache: Arc::default() }
    }

    /// σ₀² (α = 0) or σ_α² (α > 0) of `exponent`.
    pub fn spectral(exponent: CharacteristicExponent<T>, alpha: T, tol: T) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(format!("α = {alpha} must be ≥ 0")));
        }
        let concave = alpha == T::zero() && exponent.stable_view().is_some();
        Ok(Self::build(Source::Spectral { exponent, alpha }, tol, concave))
    }

    pub fn sigma0(exponent: CharacteristicExponent<T>) -> Self {
        Self::build(Source::Spectral { exponent: exponent.clone(), alpha: T::zero() }, lit(DEFAULT_TOL), exponent.stable_view().is_some())
    }

    /// Fractional Brownian motion: σ²(h) = h^r.
    pub fn power_law(r: T) -> Result<Self> {
        Self::scaled_power_law(T::one(), r)
    }

    /// σ²(h) = scale·h^r. The boundary r = 2 (a.s. linear paths) is rejected.
    pub fn scaled_power_law(scale: T, r: T) -> Result<Self> {
        if !(r > T::zero() && r < lit(2.0)) {
            return Err(Error::domain(format!("power-law exponent r = {r} must lie in (0, 2)")));
        }
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(Error::domain(format!("power-law scale {scale} must be positive")));
        }
        Ok(Self::build(Source::PowerLaw { scale, r }, T::epsilon() * lit(64.0), r <= T::one()))
    }

    pub fn closed_form_stable(beta: T) -> Result<Self> {
        sigma0_sq_stable_closed(beta, T::one())?;
        Ok(Self::build(Source::ClosedFormStable { beta }, T::epsilon() * lit(64.0), true))
    }

    /// σ² supplied as a function of ln h.
    pub fn custom(name: impl Into<String>, of_ln_h: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::build(Source::Custom { name: name.into(), of_ln_h: Arc::new(of_ln_h) }, T::epsilon() * lit(64.0), false)
    }

    /// Declare σ² concave on `[0, δ]`.
    pub fn with_concave(mut self, concave: bool) -> Self {
        self.concave = concave;
        self
    }

    /// Declare the monotonicity range `[0, δ]`.
    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = T::clamp_tol(tol);
        self.cache = Arc::default();
        self
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    /// Relative accuracy of evaluated values.
    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    pub fn describe(&self) -> String {
        match &self.source {
            Source::Spectral { exponent, alpha } if *alpha == T::zero() => format!("sigma0[{}]", exponent.describe()),
            Source::Spectral { exponent, alpha } => {
                format!("sigma_alpha[{},alpha={}]", exponent.describe(), alpha.to_f64_lossy())
            }
            Source::PowerLaw { scale, r } if *scale == T::one() => format!("h^{}", r.to_f64_lossy()),
            Source::PowerLaw { scale, r } => format!("{}*h^{}", scale.to_f64_lossy(), r.to_f64_lossy()),
            Source::ClosedFormStable { beta } => format!("stable-closed(beta={})", beta.to_f64_lossy()),
            Source::Custom { name, .. } => name.clone(),
        }
    }

    /// σ²(h); even in h.
    pub fn sigma_sq(&self, h: T) -> Result<T> {
        let h = h.abs();
        if h == T::zero() {
            return Ok(T::zero());
        }
        match &self.source {
            Source::PowerLaw { scale, r } => Ok(*scale * h.powf(*r)),
            Source::ClosedFormStable { beta } => sigma0_sq_stable_closed(*beta, h),
            Source::Custom { of_ln_h, .. } => Ok(of_ln_h(h.ln())),
            Source::Spectral { exponent, alpha } => {
                let key = h.to_f64_lossy().to_bits();
                if let Some(v) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
                    return Ok(v);
                }
                let v = if *alpha == T::zero() {
                    sigma0_sq(exponent, h, self.tol)?
                } else {
                    sigma_alpha_sq(exponent, *alpha, h, self.tol)?
                };
                if let Ok(mut c) = self.cache.write() {
                    c.insert(key, v);
                }
                Ok(v)
            }
        }
    }

    pub fn sigma(&self, h: T) -> Result<T> {
        Ok(self.sigma_sq(h)?.sqrt())
    }

    /// ln σ²(h) given ln h. Power laws and the spectral σ₀² of stable exponents
    /// use exact scaling, so ln h may lie far outside the floating-point range.
    pub fn ln_sigma_sq(&self, ln_h: T) -> Result<T> {
        match &self.source {
            Source::PowerLaw { scale, r } => Ok(scale.ln() + *r * ln_h),
            Source::ClosedFormStable { beta } => {
                Ok(sigma0_sq_stable_closed(*beta, T::one())?.ln() + (*beta - T::one()) * ln_h)
            }
            Source::Custom { of_ln_h, .. } => Ok(of_ln_h(ln_h).ln()),
            Source::Spectral { exponent, alpha } => {
                if let (Some((_, beta)), true) = (exponent.stable_view(), *alpha == T::zero()) {
                    return Ok(self.sigma_sq(T::one())?.ln() + (beta - T::one()) * ln_h);
                }
                let h = ln_h.exp();
                if !(h.is_normal()) {
                    return Err(Error::domain(format!(
                        "ln h = {ln_h} is outside the range where {} can be evaluated",
                        self.describe()
                    )));
                }
                Ok(self.sigma_sq(h)?.ln())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_validation() {
        assert!(StructureFunction::power_law(2.0_f64).is_err());
        assert!(StructureFunction::power_law(0.0_f64).is_err());
        let s = StructureFunction::power_law(0.5_f64).unwrap();
        assert_relative_eq!(s.sigma_sq(4.0).unwrap(), 2.0);
        assert_eq!(s.sigma_sq(0.0).unwrap(), 0.0);
        assert!(s.is_concave());
        assert!(!StructureFunction::power_law(1.5_f64).unwrap().is_concave());
    }

    #[test]
    fn spectral_is_cached_and_shared() {
        let e = CharacteristicExponent::canonical_stable(1.5).unwrap();
        let s = StructureFunction::spectral(e, 0.0, 1e-9).unwrap();
        let t = s.clone();
        let v = s.sigma_sq(1.0).unwrap();
        assert_relative_eq!(v, 1.59576912160573, max_relative = 1e-8);
        assert_eq!(t.cached_len(), 1);
        assert_eq!(t.sigma_sq(1.0).unwrap(), v);
        assert!(s.is_concave());
    }

    #[test]
    fn log_domain_scaling() {
        let e = CharacteristicExponent::canonical_stable(2.0).unwrap();
        let s = StructureFunction::spectral(e, 0.0, 1e-9).unwrap();
        // h = e^{-2000} is not representable but σ² = h scales exactly
        assert_relative_eq!(s.ln_sigma_sq(-2000.0).unwrap(), -2000.0, max_relative = 1e-9);
        let c = StructureFunction::custom("inv-log", |ln_h: f64| 1.0 / (ln_h * ln_h));
        assert_relative_eq!(c.ln_sigma_sq(-1e4).unwrap(), -2.0 * 1e4f64.ln(), max_relative = 1e-12);
        let t = StructureFunction::spectral(CharacteristicExponent::brownian_half(), 1.0, 1e-9).unwrap();
        assert!(t.ln_sigma_sq(-2000.0).is_err());
    }

    #[test]
    fn threads_see_consistent_values() {
        let s = StructureFunction::sigma0(CharacteristicExponent::brownian_half());
        let vals: Vec<f64> = std::thread::scope(|sc| {
            let hs: Vec<_> = (0..4).map(|_| sc.spawn(|| s.sigma_sq(0.3).unwrap())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(vals.iter().all(|v| *v == vals[0]));
        assert_relative_eq!(vals[0], 0.6, max_relative = 1e-8);
    }
}
