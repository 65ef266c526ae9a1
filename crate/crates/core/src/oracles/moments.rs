//! Moments of local times as simplex integrals of transition densities.

use serde::Serialize;

use super::kernel::DensityKernel;
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::scalar::{lit, Scalar};
use crate::special::gamma;
use crate::spectral::{abs_moment_normal, v_of_t, CharacteristicExponent, StructureFunction, DEFAULT_TOL};

/// Highest moment order evaluated by nested quadrature.
pub const MAX_QUADRATURE_ORDER: u32 = 3;

/// E^z[(L_t^x)^m] for the process started at z. `y` is the second level used
/// by difference moments.
#[derive(Debug, Clone)]
pub struct MomentQuery<T> {
    pub exponent: CharacteristicExponent<T>,
    pub m: u32,
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
    pub tol: T,
}

impl<T: Scalar> MomentQuery<T> {
    pub fn new(exponent: CharacteristicExponent<T>, m: u32, t: T) -> Self {
        Self { exponent, m, t, x: T::zero(), y: T::zero(), z: T::zero(), tol: lit(DEFAULT_TOL) }
    }

    pub fn at(mut self, x: T) -> Self {
        self.x = x;
        self
    }

    pub fn with_y(mut self, y: T) -> Self {
        self.y = y;
        self
    }

    pub fn from(mut self, z: T) -> Self {
        self.z = z;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::domain("moment order m must be ≥ 1"));
        }
        if !(self.t > T::zero()) {
            return Err(Error::domain(format!("time t = {} must be positive", self.t)));
        }
        if self.exponent.tail_exponent() <= T::one() {
            return Err(Error::domain("β ≤ 1: the process has no local times"));
        }
        Ok(())
    }

    /// Fixture key for this query.
    pub fn descriptor(&self) -> String {
        format!(
            "local_time_moment[{};m={};t={};x={};z={}]",
            self.exponent.describe(),
            self.m,
            self.t.to_f64_lossy(),
            self.x.to_f64_lossy(),
            self.z.to_f64_lossy()
        )
    }
}

fn factorial<T: Scalar>(m: u32) -> T {
    (1..=m).fold(T::one(), |acc, k| acc * lit(k as f64))
}

/// m! C^m Γ(1−1/β)^m t^{m(1−1/β)} / Γ(m(1−1/β)+1) with C = Γ(1+1/β)/(π c^{1/β}):
/// the simplex integral of Π p_{Δtᵢ}(0) for ψ = c|λ|^β.
pub fn dirichlet_moment<T: Scalar>(c: T, beta: T, m: u32, t: T) -> Result<T> {
    if !(beta > T::one() && beta <= lit(2.0)) {
        return Err(Error::domain(format!("β = {beta} must lie in (1, 2]")));
    }
    if m == 0 || !(t > T::zero()) {
        return Err(Error::domain("need m ≥ 1 and t > 0"));
    }
    let one = T::one();
    let ib = beta.recip();
    let a = one - ib;
    let big_c = gamma(one + ib) / (T::PI() * c.powf(ib));
    let mf: T = lit(m as f64);
    Ok(factorial::<T>(m) * (big_c * gamma(a)).powf(mf) * t.powf(mf * a) / gamma(mf * a + one))
}

// ∫_0^T f(s) ds with s = u^{γ/(γ−1)}, which cancels an s^{−1/γ} singularity at 0.
fn singular_integral<T, F>(kernel: &DensityKernel<T>, big_t: T, tol: T, mut f: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if big_t <= T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let gam = kernel.gamma();
    let k = gam / (gam - one);
    let u_max = big_t.powf(k.recip());
    let opts = QuadOptions::new(tol);
    let est = try_integrate(
        |u: T| {
            let s = u.powf(k);
            if !(s > T::zero()) {
                return Ok(T::zero());
            }
            Ok(f(s.min(big_t))? * k * u.powf(k - one))
        },
        T::zero(),
        u_max,
        &opts,
    )?;
    Ok(est.value)
}

/// G_k(T) = ∫_{Δ₁+…+Δ_k ≤ T} Π p_{Δᵢ}(0) dΔ, by k nested quadratures.
pub fn simplex_integral<T: Scalar>(kernel: &DensityKernel<T>, k: u32, big_t: T, tol: T) -> Result<T> {
    if k == 0 {
        return Ok(T::one());
    }
    if big_t <= T::zero() {
        return Ok(T::zero());
    }
    let inner_tol = tol * lit(0.1);
    singular_integral(kernel, big_t, tol, |s| {
        Ok(kernel.p(s, T::zero())? * simplex_integral(kernel, k - 1, big_t - s, inner_tol)?)
    })
}

/// m! ∫_{0<t₁<…<t_m<t} p_{t₁}(d) Π_{i≥2} p_{tᵢ−tᵢ₋₁}(0) dt, with d = x − z.
pub fn nested_moment<T: Scalar>(kernel: &DensityKernel<T>, m: u32, t: T, d: T, tol: T) -> Result<T> {
    if m == 0 || !(t > T::zero()) {
        return Err(Error::domain("need m ≥ 1 and t > 0"));
    }
    if m > MAX_QUADRATURE_ORDER {
        return Err(Error::Unsupported(format!(
            "moment order {m} by nested quadrature (at most {MAX_QUADRATURE_ORDER})"
        )));
    }
    let tol = T::clamp_tol(tol);
    let inner_tol = tol * lit(0.1);
    let v = singular_integral(kernel, t, tol, |s| {
        Ok(kernel.p(s, d)? * simplex_integral(kernel, m - 1, t - s, inner_tol)?)
    })?;
    Ok(factorial::<T>(m) * v)
}

/// E^z[(L_t^x)^m].
pub fn local_time_moment<T: Scalar>(q: &MomentQuery<T>) -> Result<T> {
    q.validate()?;
    if q.x == q.z {
        if let Some((c, beta)) = q.exponent.stable_view() {
            return dirichlet_moment(c, beta, q.m, q.t);
        }
        if q.m == 1 {
            return v_of_t(&q.exponent, q.t, q.tol);
        }
    }
    let kernel = DensityKernel::new(q.exponent.clone(), q.tol * lit(0.01))?;
    nested_moment(&kernel, q.m, q.t, q.x - q.z, q.tol)
}

/// E^0[(L_t^x − L_t^y)²] = 2∫_0^t (p_{t₁}(x) + p_{t₁}(y)) F(t − t₁) dt₁ with
/// F(T) = ∫_0^T (p_Δ(0) − p_Δ(x − y)) dΔ.
pub fn local_time_diff_second_moment<T: Scalar>(
    exponent: &CharacteristicExponent<T>,
    t: T,
    x: T,
    y: T,
    tol: T,
) -> Result<T> {
    let kernel = DensityKernel::new(exponent.clone(), tol * lit(0.01))?;
    diff_second_moment_with(&kernel, t, x, y, tol)
}

/// [`local_time_diff_second_moment`] with an explicit density source.
pub fn diff_second_moment_with<T: Scalar>(kernel: &DensityKernel<T>, t: T, x: T, y: T, tol: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::domain(format!("time t = {t} must be positive")));
    }
    if x == y {
        return Ok(T::zero());
    }
    let tol = T::clamp_tol(tol);
    let d = (x - y).abs();
    let inner_tol = tol * lit(0.1);
    let inner = |big_t: T| {
        singular_integral(kernel, big_t, inner_tol, |s| Ok(kernel.p(s, T::zero())? - kernel.p(s, d)?))
    };
    let v = singular_integral(kernel, t, tol, |s| Ok((kernel.p(s, x)? + kernel.p(s, y)?) * inner(t - s)?))?;
    Ok(lit::<T>(2.0) * v)
}

/// Fit of E(L^x − L^y)² ≤ (C·V^{1/2}(t)·σ₀(x−y))² across lags.
#[derive(Debug, Clone, Serialize)]
pub struct MomentBoundFit {
    pub lags: Vec<f64>,
    /// (E(ΔL)²/(V σ₀²))^{1/2} per lag.
    pub constants: Vec<f64>,
    /// max of `constants`: the smallest C valid at every lag.
    pub fitted: f64,
    /// max/min of `constants`.
    pub spread: f64,
    pub stable: bool,
}

/// Spread allowed for the fitted constant to count as stable.
pub const MAX_CONSTANT_SPREAD: f64 = 2.0;

pub fn fit_moment_bound<T: Scalar>(exponent: &CharacteristicExponent<T>, t: T, lags: &[T], tol: T) -> Result<MomentBoundFit> {
    let v = v_of_t(exponent, t, tol)?;
    let sigma0 = StructureFunction::sigma0(exponent.clone()).with_tolerance(tol);
    let mut constants = Vec::with_capacity(lags.len());
    for &d in lags {
        let m2 = local_time_diff_second_moment(exponent, t, T::zero(), d, tol)?;
        constants.push((m2 / (v * sigma0.sigma_sq(d)?)).sqrt().to_f64_lossy());
    }
    let fitted = constants.iter().cloned().fold(0.0, f64::max);
    let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = fitted / min;
    Ok(MomentBoundFit {
        lags: lags.iter().map(|d| d.to_f64_lossy()).collect(),
        constants,
        fitted,
        spread,
        stable: spread <= MAX_CONSTANT_SPREAD,
    })
}

/// 2^{3p/2} Γ((p+1)/2)/√π: the limit of ∫|ΔL|^p dx / h^{p/2} per unit ∫|L|^{p/2}
/// for standard Brownian motion.
pub fn brownian_theorem_constant<T: Scalar>(p: T) -> Result<T> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::domain(format!("p = {p} must be ≥ 1")));
    }
    // 2^{3p/2}Γ((p+1)/2)/√π = 2^p E|η|^p
    Ok(lit::<T>(2.0).powf(p) * abs_moment_normal(p)?)
}
