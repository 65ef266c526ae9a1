//! Pathwise L^p moduli of continuity of simulated Gaussian paths.

use super::path::{grid_steps, GaussianPath};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::spectral::StructureFunction;

/// Grid indices `[lo, hi)` of the points of `[a, b)` and the lag `k = h/Δ`,
/// after checking that every `x + h` stays on the path.
pub(crate) fn window_indices<T: Scalar>(
    origin: T,
    spacing: T,
    len: usize,
    h: T,
    a: T,
    b: T,
) -> Result<(usize, usize, usize)> {
    if !(h > T::zero()) {
        return Err(Error::domain(format!("lag h = {h} must be positive")));
    }
    if !(b > a) {
        return Err(Error::domain(format!("window [{a}, {b}] is empty")));
    }
    let k = grid_steps(h, spacing)?;
    let eps = lit::<T>(1e-9);
    let lo = ((a - origin) / spacing - eps).ceil();
    let hi = ((b - origin) / spacing - eps).ceil();
    let last = len as f64 - 1.0;
    let hi_needed = hi.to_f64_lossy() - 1.0 + k as f64;
    if lo < T::zero() || hi_needed > last {
        return Err(Error::Window {
            a: a.to_f64_lossy(),
            b: (b + h).to_f64_lossy(),
            lo: origin.to_f64_lossy(),
            hi: (origin + spacing * lit(last)).to_f64_lossy(),
        });
    }
    Ok((lo.to_usize().unwrap(), hi.to_usize().unwrap(), k))
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p >= T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("p = {p} must be ≥ 1")))
    }
}

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

/// Δ · Σ_{x ∈ [a,b)} |G(x+h) − G(x)|^p / σ(h)^p.
pub fn lp_modulus_gaussian<T: Scalar>(
    path: &GaussianPath<T>,
    h: T,
    p: T,
    a: T,
    b: T,
    sigma: &StructureFunction<T>,
) -> Result<T> {
    check_p(p)?;
    let (lo, hi, k) = window_indices(path.a, path.spacing, path.values.len(), h, a, b)?;
    let v = &path.values;
    let sum = (lo..hi).fold(T::zero(), |acc, i| acc + powp(v[i + k] - v[i], p));
    Ok(path.spacing * sum / powp(sigma.sigma(h)?, p))
}

/// Δ · Σ_{x ∈ [a,b)} |G²(x+h) − G²(x)|^p / σ(h)^p.
pub fn lp_modulus_squared_gaussian<T: Scalar>(
    path: &GaussianPath<T>,
    h: T,
    p: T,
    a: T,
    b: T,
    sigma: &StructureFunction<T>,
) -> Result<T> {
    check_p(p)?;
    let (lo, hi, k) = window_indices(path.a, path.spacing, path.values.len(), h, a, b)?;
    let v = &path.values;
    let sum = (lo..hi).fold(T::zero(), |acc, i| acc + powp(v[i + k] * v[i + k] - v[i] * v[i], p));
    Ok(path.spacing * sum / powp(sigma.sigma(h)?, p))
}

/// Δ · Σ_{x ∈ [a,b)} |G(x)|^p, the pathwise factor in the squared-process limit.
pub fn lp_norm_gaussian<T: Scalar>(path: &GaussianPath<T>, p: T, a: T, b: T) -> Result<T> {
    check_p(p)?;
    let (lo, hi, _) = window_indices(path.a, path.spacing, path.values.len(), path.spacing, a, b)?;
    let v = &path.values;
    Ok(path.spacing * (lo..hi).fold(T::zero(), |acc, i| acc + powp(v[i], p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn h_squared() -> StructureFunction<f64> {
        StructureFunction::custom("h^2", |ln_h: f64| (2.0 * ln_h).exp())
    }

    #[test]
    fn zero_and_linear_paths() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let h = 4.0 * dx;
        let zero = GaussianPath::from_values(0.0, 1.0, h, dx, vec![0.0; n + 5]).unwrap();
        let s = StructureFunction::power_law(0.5).unwrap();
        assert_eq!(lp_modulus_gaussian(&zero, h, 2.0, 0.0, 1.0, &s).unwrap(), 0.0);
        assert_eq!(lp_modulus_squared_gaussian(&zero, h, 2.0, 0.0, 1.0, &s).unwrap(), 0.0);
        let lin = GaussianPath::from_values(0.0, 1.0, h, dx, (0..n + 5).map(|i| i as f64 * dx).collect()).unwrap();
        assert_relative_eq!(lp_modulus_gaussian(&lin, h, 2.0, 0.0, 1.0, &h_squared()).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn alignment_and_window_errors() {
        let p = GaussianPath::from_values(0.0, 1.0, 0.25, 0.25, vec![0.0; 6]).unwrap();
        let s = StructureFunction::power_law(1.0).unwrap();
        assert!(matches!(lp_modulus_gaussian(&p, 0.3, 2.0, 0.0, 1.0, &s), Err(Error::Alignment { .. })));
        assert!(matches!(lp_modulus_gaussian(&p, 0.75, 2.0, 0.0, 1.0, &s), Err(Error::Window { .. })));
        assert!(lp_modulus_gaussian(&p, 0.25, 0.5, 0.0, 1.0, &s).is_err());
        assert!(lp_modulus_gaussian(&p, 0.25, 2.0, 0.0, 1.0, &s).is_ok());
    }

    #[test]
    fn squared_shift_identity() {
        // (G(x+h)+c)² − (G(x)+c)² = (G(x+h) − G(x))·(G(x+h) + G(x) + 2c)
        let g = [0.0, 0.7, -0.4];
        let c = 1.3;
        let shifted: Vec<f64> = g.iter().map(|v| v + c).collect();
        let path = GaussianPath::from_values(0.0, 1.0, 1.0, 1.0, shifted).unwrap();
        let s = StructureFunction::power_law(1.0).unwrap();
        let got = lp_modulus_squared_gaussian(&path, 1.0, 1.0, 0.0, 1.0, &s).unwrap();
        let want = ((g[1] - g[0]) * (g[1] + g[0] + 2.0 * c)).abs();
        assert_relative_eq!(got, want, max_relative = 1e-14);
        let path = GaussianPath::from_values(0.0, 2.0, 1.0, 1.0, vec![c, 0.7 + c, -0.4 + c, c]).unwrap();
        let got = lp_modulus_squared_gaussian(&path, 1.0, 1.0, 0.0, 2.0, &s).unwrap();
        let want2 = want + ((g[2] - g[1]) * (g[2] + g[1] + 2.0 * c)).abs();
        assert_relative_eq!(got, want2, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn shift_invariance(vals in proptest::collection::vec(-5.0f64..5.0, 17), c in -10.0f64..10.0, p in 1.0f64..4.0) {
            let s = StructureFunction::power_law(0.7).unwrap();
            let path = GaussianPath::from_values(0.0, 1.0, 0.25, 0.078125, {
                let mut v = vec![0.0; 17];
                v[1..].copy_from_slice(&vals[1..]);
                v
            }).unwrap();
            let shifted = GaussianPath { values: path.values.iter().map(|v| v + c).collect(), ..path.clone() };
            let a = lp_modulus_gaussian(&path, 0.15625, p, 0.0, 1.0, &s).unwrap();
            let b = lp_modulus_gaussian(&shifted, 0.15625, p, 0.0, 1.0, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
