//! Occupation-density (bin counting) estimates of local times.

use std::io::Write;

use super::path::{SamplePath, StableIncrements};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Local-time estimate ℓ_j on bins of width ε centered at j·ε.
///
/// Bins outside the stored range carry no occupation and read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField<T> {
    pub epsilon: T,
    /// Index j of the first stored bin (center j·ε).
    pub first_bin: i64,
    pub values: Vec<T>,
    pub t: T,
    /// Set when ε is below 4× the typical size of one path step.
    pub resolution_warning: bool,
}

/// Smallest power of two ≥ 4 × `step_scale`: the default bin width.
pub fn default_epsilon(step_scale: f64) -> f64 {
    2f64.powi((4.0 * step_scale).log2().ceil() as i32)
}

#[inline]
fn bin_of(x: f64, inv_eps: f64) -> i64 {
    (x * inv_eps + 0.5).floor() as i64
}

impl<T: Scalar> LocalTimeField<T> {
    /// Bin counting of the left-endpoint skeleton `positions[0..n]` of a path
    /// on `[0, t]` with `n` steps; the final position is not occupied.
    ///
    /// Bins cover the path range and the window `[a, b]`.
    pub fn from_positions(positions: &[f64], t: T, epsilon: T, window: (T, T), step_scale: f64) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::domain(format!("bin width ε = {epsilon} must be positive")));
        }
        if positions.len() < 2 {
            return Err(Error::domain("need a path with at least one step"));
        }
        let n = positions.len() - 1;
        let eps = epsilon.to_f64_lossy();
        let inv = 1.0 / eps;
        let skeleton = &positions[..n];
        let (mut lo, mut hi) = skeleton.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        lo = lo.min(window.0.to_f64_lossy());
        hi = hi.max(window.1.to_f64_lossy());
        let first = bin_of(lo, inv);
        let last = bin_of(hi, inv);
        let mut counts = vec![0u64; (last - first + 1) as usize];
        for &x in skeleton {
            counts[(bin_of(x, inv) - first) as usize] += 1;
        }
        // ℓ_j = (t/n)·count/ε
        let w = t.to_f64_lossy() / n as f64 * inv;
        Ok(Self {
            epsilon,
            first_bin: first,
            values: counts.into_iter().map(|c| lit(c as f64 * w)).collect(),
            t,
            resolution_warning: eps < 4.0 * step_scale,
        })
    }

    /// The field at t = 0: no occupation anywhere; bins cover `[a, b]`.
    pub fn zero(epsilon: T, window: (T, T)) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::domain(format!("bin width ε = {epsilon} must be positive")));
        }
        let inv = 1.0 / epsilon.to_f64_lossy();
        let first = bin_of(window.0.to_f64_lossy(), inv);
        let last = bin_of(window.1.to_f64_lossy(), inv).max(first);
        Ok(Self {
            epsilon,
            first_bin: first,
            values: vec![T::zero(); (last - first + 1) as usize],
            t: T::zero(),
            resolution_warning: false,
        })
    }

    pub fn last_bin(&self) -> i64 {
        self.first_bin + self.values.len() as i64 - 1
    }

    pub fn center(&self, j: i64) -> T {
        self.epsilon * lit(j as f64)
    }

    /// ℓ at bin `j`; 0 outside the stored range.
    #[inline]
    pub fn at(&self, j: i64) -> T {
        let i = j - self.first_bin;
        if i < 0 || i >= self.values.len() as i64 {
            T::zero()
        } else {
            self.values[i as usize]
        }
    }

    /// ε·Σℓ_j, which equals t.
    pub fn total_mass(&self) -> T {
        self.epsilon * self.values.iter().fold(T::zero(), |a, v| a + *v)
    }

    /// Bin indices j with j·ε ∈ [a, b).
    pub fn bins_in(&self, a: T, b: T) -> Result<std::ops::Range<i64>> {
        if !(b > a) {
            return Err(Error::domain(format!("window [{a}, {b}] is empty")));
        }
        let tiny = lit::<T>(1e-9);
        let lo = (a / self.epsilon - tiny).ceil().to_i64().ok_or_else(|| Error::domain("window too wide"))?;
        let hi = (b / self.epsilon - tiny).ceil().to_i64().ok_or_else(|| Error::domain("window too wide"))?;
        Ok(lo..hi)
    }

    /// Window `[a, b)` whose lag-`h` differences cover the whole support.
    pub fn full_line_window(&self, h: T) -> (T, T) {
        (self.center(self.first_bin) - h, self.center(self.last_bin() + 1))
    }

    /// Write `x,ell` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,ell")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.center(self.first_bin + i as i64).to_f64_lossy(), v.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Local-time field of a sample path on bins of width ε; bins extend to cover
/// both the path and `[a, b]`.
pub fn estimate_local_time<T: Scalar>(path: &SamplePath<T>, epsilon: T, a: T, b: T) -> Result<LocalTimeField<T>> {
    let scale = StableIncrements::new(&path.family, path.step()).map(|s| s.scale()).unwrap_or(0.0);
    let xs: Vec<f64> = path.values.iter().map(|v| v.to_f64_lossy()).collect();
    LocalTimeField::from_positions(&xs, path.t_end, epsilon, (a, b), scale)
}

/// Local-time field at an intermediate time `t` on the path's grid, using the
/// first t/Δt steps. At t = 0 the field is identically zero.
pub fn estimate_local_time_until<T: Scalar>(path: &SamplePath<T>, t: T, epsilon: T, a: T, b: T) -> Result<LocalTimeField<T>> {
    if t < T::zero() || t > path.t_end * lit(1.0 + 1e-12) {
        return Err(Error::domain(format!("time {t} outside [0, {}]", path.t_end)));
    }
    if t == T::zero() {
        return LocalTimeField::zero(epsilon, (a, b));
    }
    let steps = crate::gaussian::path::grid_steps(t, path.step())?;
    let scale = StableIncrements::new(&path.family, path.step()).map(|s| s.scale()).unwrap_or(0.0);
    let xs: Vec<f64> = path.values[..=steps].iter().map(|v| v.to_f64_lossy()).collect();
    LocalTimeField::from_positions(&xs, t, epsilon, (a, b), scale)
}
