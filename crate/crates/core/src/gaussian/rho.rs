//! The normalized increment correlation ρ_h and its double integral.

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_breaks, QuadOptions};
use crate::scalar::{lit, Scalar};
use crate::spectral::StructureFunction;

/// ρ_h(s) = (σ²(|s+h|) + σ²(|s−h|) − 2σ²(|s|)) / (2σ²(h)), the correlation of
/// the lag-h increments at x and x+s.
#[derive(Clone)]
pub struct RhoKernel<T> {
    sigma: StructureFunction<T>,
    h: T,
    sigma_h: T,
}

impl<T: Scalar> std::fmt::Debug for RhoKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RhoKernel").field("sigma", &self.sigma).field("h", &self.h).finish()
    }
}

impl<T: Scalar> RhoKernel<T> {
    pub fn new(sigma: StructureFunction<T>, h: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::domain(format!("ρ_h needs h > 0, got {h}")));
        }
        let sigma_h = sigma.sigma_sq(h)?;
        Ok(Self { sigma, h, sigma_h })
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn eval(&self, s: T) -> Result<T> {
        let h = self.h;
        let num = self.sigma.sigma_sq((s + h).abs())? + self.sigma.sigma_sq((s - h).abs())?
            - lit::<T>(2.0) * self.sigma.sigma_sq(s.abs())?;
        Ok(num / (lit::<T>(2.0) * self.sigma_h))
    }

    /// ∫_a^b ∫_a^b |ρ_h(x−y)| dx dy = 2 ∫_0^{b−a} |ρ_h(s)| (b−a−s) ds.
    pub fn double_integral(&self, a: T, b: T, tol: T) -> Result<T> {
        if !(b > a) {
            return Err(Error::domain(format!("window [{a}, {b}] is empty")));
        }
        let c = b - a;
        let mut breaks = vec![T::zero()];
        for k in [T::one(), lit(2.0)] {
            let p = k * self.h;
            if p < c {
                breaks.push(p);
            }
        }
        breaks.push(c);
        // the result is at least of order h·(b−a); ρ_h beyond 2h may vanish
        // identically, where only an absolute target is meaningful
        let opts = QuadOptions::new(tol).with_abs_tol(tol * lit(0.1) * self.h.min(c) * c);
        let est = try_integrate_breaks(|s| Ok(self.eval(s)?.abs() * (c - s)), &breaks, &opts)?;
        Ok(lit::<T>(2.0) * est.value)
    }
}

/// Free-function form of [`RhoKernel::double_integral`].
pub fn rho_double_integral<T: Scalar>(k: &RhoKernel<T>, a: T, b: T, tol: T) -> Result<T> {
    k.double_integral(a, b, tol)
}
