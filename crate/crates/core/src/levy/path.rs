//! Symmetric stable Lévy paths on a uniform time grid.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::rng::replica_rng;
use crate::scalar::{lit, Scalar};
use crate::spectral::CharacteristicExponent;

/// A path X(0)=0, X(t/n), …, X(t) of a symmetric Lévy process.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath<T> {
    pub t_end: T,
    pub n: usize,
    pub values: Vec<T>,
    pub family: CharacteristicExponent<T>,
}

impl<T: Scalar> SamplePath<T> {
    pub fn step(&self) -> T {
        self.t_end / lit(self.n as f64)
    }

    /// Write `t,x` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x")?;
        let dt = self.step();
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", (dt * lit(i as f64)).to_f64_lossy(), v.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// I.i.d. increments with characteristic function exp(−dt·c|λ|^β).
#[derive(Debug, Clone, Copy)]
pub struct StableIncrements {
    beta: f64,
    /// (c·dt)^{1/β}
    scale: f64,
    angle: Uniform<f64>,
}

impl StableIncrements {
    pub fn new<T: Scalar>(exp: &CharacteristicExponent<T>, dt: T) -> Result<Self> {
        let Some((c, beta)) = exp.stable_view() else {
            return Err(Error::Unsupported(
                "path simulation needs a stable or Brownian exponent; tabulated ψ is spectral-only".into(),
            ));
        };
        if !(dt > T::zero()) {
            return Err(Error::domain(format!("time step {dt} must be positive")));
        }
        let beta = beta.to_f64_lossy();
        let scale = (c * dt).to_f64_lossy().powf(1.0 / beta);
        let angle = Uniform::new(-FRAC_PI_2, FRAC_PI_2).expect("nonempty interval");
        Ok(Self { beta, scale, angle })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Typical size of one increment, (c·dt)^{1/β}.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// One increment. For β = 2 this is N(0, 2c·dt); otherwise the
    /// Chambers–Mallows–Stuck transform of a uniform angle and an Exp(1) variate.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.beta == 2.0 {
            let z: f64 = StandardNormal.sample(rng);
            return z * std::f64::consts::SQRT_2 * self.scale;
        }
        let b = self.beta;
        let v = self.angle.sample(rng);
        let w: f64 = Exp1.sample(rng);
        let cv = v.cos();
        let x = (b * v).sin() / cv.powf(1.0 / b) * (((1.0 - b) * v).cos() / w).powf((1.0 - b) / b);
        x * self.scale
    }

    /// Fill `out[1..]` with the partial sums of `out.len() − 1` increments.
    pub fn fill_path<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut acc = 0.0;
        if let Some(first) = out.first_mut() {
            *first = 0.0;
        }
        for v in out.iter_mut().skip(1) {
            acc += self.sample(rng);
            *v = acc;
        }
    }
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("a path needs n ≥ 1 steps"))
    } else {
        Ok(())
    }
}

/// Path of the process with exponent `exp` (stable or Brownian families).
pub fn simulate_path<T: Scalar>(exp: &CharacteristicExponent<T>, t: T, n: usize, seed: u64) -> Result<SamplePath<T>> {
    check_steps(n)?;
    if !(t > T::zero()) {
        return Err(Error::domain(format!("time horizon {t} must be positive")));
    }
    let inc = StableIncrements::new(exp, t / lit(n as f64))?;
    let mut buf = vec![0.0; n + 1];
    inc.fill_path(&mut replica_rng(seed, 0), &mut buf);
    Ok(SamplePath { t_end: t, n, values: buf.into_iter().map(lit).collect(), family: exp.clone() })
}

/// Path of the canonical β-stable process, ψ(λ) = |λ|^β.
pub fn simulate_stable_path<T: Scalar>(beta: T, t: T, n: usize, seed: u64) -> Result<SamplePath<T>> {
    if beta <= T::one() {
        return Err(Error::domain(format!("β = {beta} ≤ 1: the process has no local times")));
    }
    simulate_path(&CharacteristicExponent::canonical_stable(beta)?, t, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn shape_and_determinism() {
        let p = simulate_stable_path(1.5, 1.0, 100, 3).unwrap();
        assert_eq!(p.values.len(), 101);
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p, simulate_stable_path(1.5, 1.0, 100, 3).unwrap());
        assert!(simulate_stable_path(1.0, 1.0, 100, 3).is_err());
        assert!(simulate_stable_path(0.8, 1.0, 100, 3).is_err());
        assert!(simulate_stable_path(1.5, 1.0, 0, 3).is_err());
    }

    #[test]
    fn canonical_two_stable_increment_variance() {
        let n = 1 << 16;
        let p = simulate_stable_path::<f64>(2.0, 1.0, n, 11).unwrap();
        let sq: Vec<f64> = p.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
        let (m, se) = mean_se(&sq);
        assert!((m - 2.0 / n as f64).abs() < 3.0 * se, "{m} vs {}", 2.0 / n as f64);
    }

    #[test]
    fn brownian_half_increment_variance() {
        let n = 1 << 14;
        let p = simulate_path::<f64>(&CharacteristicExponent::brownian_half(), 1.0, n, 12).unwrap();
        let sq: Vec<f64> = p.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
        let (m, se) = mean_se(&sq);
        assert!((m - 1.0 / n as f64).abs() < 3.0 * se);
    }

    #[test]
    fn stable_characteristic_function() {
        // E cos(X_1) = e^{-1} for ψ = |λ|^1.5
        let inc = StableIncrements::new(&CharacteristicExponent::canonical_stable(1.5).unwrap(), 1.0).unwrap();
        let mut rng = replica_rng(2024, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| inc.sample(&mut rng).cos()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - (-1f64).exp()).abs() < 3.0 * se, "{m} ± {se}");
        // scaled: E cos(λX_t) = exp(−t c λ^β)
        let e = CharacteristicExponent::scaled_stable(0.5, 1.3).unwrap();
        let inc = StableIncrements::new(&e, 2.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| (0.7 * inc.sample(&mut rng)).cos()).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - (-2.0 * 0.5 * 0.7f64.powf(1.3)).exp()).abs() < 3.0 * se);
    }

    #[test]
    fn tabulated_paths_are_unsupported() {
        let t = crate::spectral::TabulatedExponent::new(vec![0.0, 1.0], vec![0.0, 1.0], 1.5).unwrap();
        let e = CharacteristicExponent::tabulated(t);
        assert!(matches!(simulate_path(&e, 1.0, 10, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_export() {
        let p = SamplePath {
            t_end: 1.0,
            n: 2,
            values: vec![0.0, 0.5, -0.25],
            family: CharacteristicExponent::brownian_half(),
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n0,0\n0.5,0.5\n1,-0.25\n");
    }
}
