//! Exact simulation of stationary-increment Gaussian paths on uniform grids.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::replica_rng;
use crate::scalar::{lit, Scalar};
use crate::spectral::StructureFunction;

/// Covariance of unit-lag increments at separation `lag·Δ`:
/// ½(σ²((lag+1)Δ) + σ²(|lag−1|Δ) − 2σ²(lagΔ)).
pub fn increment_autocovariance<T: Scalar>(sigma: &StructureFunction<T>, spacing: T, lag: usize) -> Result<T> {
    let k = lit::<T>(lag as f64);
    let one = T::one();
    let up = sigma.sigma_sq((k + one) * spacing)?;
    let down = sigma.sigma_sq((k - one).abs() * spacing)?;
    let mid = sigma.sigma_sq(k * spacing)?;
    Ok(lit::<T>(0.5) * (up + down - lit::<T>(2.0) * mid))
}

/// Round `len/spacing` to an integer, failing if it is not one.
pub(crate) fn grid_steps<T: Scalar>(len: T, spacing: T) -> Result<usize> {
    if !(spacing > T::zero()) {
        return Err(Error::domain(format!("grid spacing {spacing} must be positive")));
    }
    let q = len / spacing;
    let k = q.round();
    if (q - k).abs() > lit::<T>(1e-9) * k.max(T::one()) || k < T::zero() {
        return Err(Error::Alignment { lag: len.to_f64_lossy(), spacing: spacing.to_f64_lossy() });
    }
    k.to_usize().ok_or_else(|| Error::domain("grid too large"))
}

#[derive(Clone)]
enum Factor {
    /// √(λ_j / M) for the circulant of size M = 2N, with its FFT.
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    /// Lower Cholesky factor of the N×N increment covariance.
    Dense(DMatrix<f64>),
}

/// Draws the increment vector (G(x_{i+1}) − G(x_i))_{i<N} exactly.
///
/// The factorization is computed once and shared across draws.
#[derive(Clone)]
pub struct IncrementSampler {
    n: usize,
    factor: Factor,
}

impl std::fmt::Debug for IncrementSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.factor {
            Factor::Circulant { .. } => "circulant",
            Factor::Dense(_) => "dense",
        };
        f.debug_struct("IncrementSampler").field("n", &self.n).field("factor", &kind).finish()
    }
}

impl IncrementSampler {
    /// Circulant embedding of the increment autocovariance, with a dense
    /// Cholesky fallback when the embedding has negative eigenvalues.
    pub fn new<T: Scalar>(sigma: &StructureFunction<T>, spacing: T, n: usize) -> Result<Self> {
        let acov = Self::autocovariance(sigma, spacing, n)?;
        match Self::circulant(&acov, n) {
            Some(s) => Ok(s),
            None => Self::dense_from(&acov, n),
        }
    }

    /// Dense Cholesky sampler, bypassing the circulant embedding.
    pub fn dense<T: Scalar>(sigma: &StructureFunction<T>, spacing: T, n: usize) -> Result<Self> {
        let acov = Self::autocovariance(sigma, spacing, n)?;
        Self::dense_from(&acov, n)
    }

    fn autocovariance<T: Scalar>(sigma: &StructureFunction<T>, spacing: T, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("a path needs at least one increment"));
        }
        (0..=n).map(|k| increment_autocovariance(sigma, spacing, k).map(|v| v.to_f64_lossy())).collect()
    }

    fn circulant(acov: &[f64], n: usize) -> Option<Self> {
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let k = if j <= n { j } else { m - j };
                Complex::new(acov[k], 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().fold(0.0_f64, |a, c| a.max(c.re));
        let mut sqrt_eig = Vec::with_capacity(m);
        for c in &row {
            // round-off negatives are clipped, genuine ones reject the embedding
            if c.re < -1e-10 * max {
                return None;
            }
            sqrt_eig.push((c.re.max(0.0) / m as f64).sqrt());
        }
        Some(Self { n, factor: Factor::Circulant { sqrt_eig, fft } })
    }

    fn dense_from(acov: &[f64], n: usize) -> Result<Self> {
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        if let Some(ch) = cov.clone().cholesky() {
            return Ok(Self { n, factor: Factor::Dense(ch.l()) });
        }
        let jitter = 1e-12 * acov[0].abs().max(f64::MIN_POSITIVE);
        let jittered = cov + DMatrix::identity(n, n) * jitter;
        match jittered.cholesky() {
            Some(ch) => Ok(Self { n, factor: Factor::Dense(ch.l()) }),
            None => Err(Error::Simulation(format!(
                "increment covariance of size {n} is not positive definite even with jitter {jitter:e}"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.factor, Factor::Circulant { .. })
    }

    /// One draw of the N increments.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            Factor::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut w);
                w.iter().take(self.n).map(|c| c.re).collect()
            }
            Factor::Dense(l) => {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().copied().collect()
            }
        }
    }
}

/// A stationary-increment Gaussian path on `a, a+Δ, …, b+h_max`, pinned to 0 at `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath<T> {
    pub a: T,
    pub b: T,
    pub h_max: T,
    pub spacing: T,
    pub values: Vec<T>,
}

impl<T: Scalar> GaussianPath<T> {
    /// Build from raw values on the grid starting at `a`.
    pub fn from_values(a: T, b: T, h_max: T, spacing: T, values: Vec<T>) -> Result<Self> {
        let n = grid_steps(b - a + h_max, spacing)?;
        if values.len() != n + 1 {
            return Err(Error::domain(format!("expected {} path values, got {}", n + 1, values.len())));
        }
        Ok(Self { a, b, h_max, spacing, values })
    }

    /// Path from increments by cumulative summation.
    pub fn from_increments(a: T, b: T, h_max: T, spacing: T, increments: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0_f64;
        values.push(T::zero());
        for d in increments {
            acc += d;
            values.push(lit(acc));
        }
        Self::from_values(a, b, h_max, spacing, values)
    }

    pub fn x(&self, i: usize) -> T {
        self.a + self.spacing * lit(i as f64)
    }

    pub fn end(&self) -> T {
        self.x(self.values.len() - 1)
    }

    /// Write `x,value` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.x(i).to_f64_lossy(), v.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Grid geometry for a path on `[a, b + h_max]` with spacing Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid<T> {
    pub a: T,
    pub b: T,
    pub h_max: T,
    pub spacing: T,
}

impl<T: Scalar> PathGrid<T> {
    pub fn new(a: T, b: T, spacing: T, h_max: T) -> Result<Self> {
        if !(b > a) {
            return Err(Error::domain(format!("window [{a}, {b}] is empty")));
        }
        if h_max < T::zero() {
            return Err(Error::domain("h_max must be ≥ 0"));
        }
        let steps = grid_steps(b - a + h_max, spacing)?;
        if steps < 1 {
            return Err(Error::domain("grid must contain at least two points"));
        }
        Ok(Self { a, b, h_max, spacing })
    }

    pub fn steps(&self) -> usize {
        grid_steps(self.b - self.a + self.h_max, self.spacing).expect("validated at construction")
    }

    pub fn sampler(&self, sigma: &StructureFunction<T>) -> Result<IncrementSampler> {
        IncrementSampler::new(sigma, self.spacing, self.steps())
    }

    pub fn path_from(&self, increments: &[f64]) -> Result<GaussianPath<T>> {
        GaussianPath::from_increments(self.a, self.b, self.h_max, self.spacing, increments)
    }
}

/// Simulate G(x) − G(a) on `a, a+Δ, …, b+h_max`. Deterministic in `seed`.
pub fn simulate_stationary_increment_path<T: Scalar>(
    sigma: &StructureFunction<T>,
    a: T,
    b: T,
    spacing: T,
    h_max: T,
    seed: u64,
) -> Result<GaussianPath<T>> {
    let grid = PathGrid::new(a, b, spacing, h_max)?;
    let sampler = grid.sampler(sigma)?;
    let mut rng = replica_rng(seed, 0);
    grid.path_from(&sampler.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn autocovariance_examples() {
        let bm = StructureFunction::power_law(1.0).unwrap();
        assert_relative_eq!(increment_autocovariance(&bm, 0.1, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(increment_autocovariance(&bm, 0.1, 0).unwrap(), 0.1, max_relative = 1e-14);
        let f = StructureFunction::power_law(0.5).unwrap();
        assert_relative_eq!(increment_autocovariance(&f, 1.0, 1).unwrap(), -0.2928932188134524, max_relative = 1e-14);
        assert_relative_eq!(increment_autocovariance(&f, 0.3, 0).unwrap(), 0.3f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn path_shape_and_pinning() {
        let s = StructureFunction::power_law(0.5).unwrap();
        let p = simulate_stationary_increment_path(&s, 0.0, 1.0, 0.125, 0.0, 1).unwrap();
        assert_eq!(p.values.len(), 9);
        assert_eq!(p.values[0], 0.0);
        let q = simulate_stationary_increment_path(&s, 0.0, 1.0, 0.125, 0.0, 1).unwrap();
        assert_eq!(p, q);
        let r = simulate_stationary_increment_path(&s, 0.0, 1.0, 0.125, 0.0, 2).unwrap();
        assert_ne!(p, r);
        assert!(simulate_stationary_increment_path(&s, 0.0, 1.0, 0.3, 0.0, 1).is_err());
    }

    #[test]
    fn fbm_embedding_is_nonnegative() {
        for r in [0.2, 0.5, 1.0, 1.5, 1.9] {
            let s = StructureFunction::power_law(r).unwrap();
            assert!(IncrementSampler::new(&s, 1.0 / 512.0, 512).unwrap().is_circulant());
        }
    }

    fn empirical_cov(sampler: &IncrementSampler, reps: u64, lag: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..reps {
            let x = sampler.sample(&mut replica_rng(99, i));
            acc += x[3] * x[3 + lag];
        }
        acc / reps as f64
    }

    #[test]
    fn circulant_and_dense_reproduce_covariance() {
        let s = StructureFunction::power_law(0.5).unwrap();
        let spacing = 0.25;
        let c = IncrementSampler::new(&s, spacing, 16).unwrap();
        let d = IncrementSampler::dense(&s, spacing, 16).unwrap();
        assert!(!d.is_circulant());
        for lag in [0, 1, 2] {
            let target = increment_autocovariance(&s, spacing, lag).unwrap();
            // var(x_i x_j) ≤ 2·r0², so 20000 draws give SE ≤ 0.01·r0·1.5
            let se = 0.5 * 2f64.sqrt() / (20000f64).sqrt() * 1.5;
            assert!((empirical_cov(&c, 20000, lag) - target).abs() < 4.0 * se, "circulant lag {lag}");
            assert!((empirical_cov(&d, 20000, lag) - target).abs() < 4.0 * se, "dense lag {lag}");
        }
    }

    #[test]
    fn brownian_increment_variance() {
        let s = StructureFunction::power_law(1.0).unwrap();
        let spacing = 2f64.powi(-10);
        let grid = PathGrid::new(0.0, 1.0, spacing, 0.0).unwrap();
        let sampler = grid.sampler(&s).unwrap();
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut count = 0.0;
        for rep in 0..100 {
            for d in sampler.sample(&mut replica_rng(5, rep)) {
                sum += d * d;
                sum2 += d.powi(4);
                count += 1.0;
            }
        }
        let mean = sum / count;
        let se = ((sum2 / count - mean * mean) / count).sqrt();
        assert!((mean - spacing).abs() < 3.0 * se, "mean {mean} vs {spacing} (se {se})");
    }

    #[test]
    fn csv_export() {
        let p = GaussianPath::from_values(0.0, 1.0, 0.0, 0.5, vec![0.0, 1.0, -1.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,value\n0,0\n0.5,1\n1,-1\n");
    }
}
