//! Adaptive Gauss–Kronrod quadrature and oscillatory Fourier-type integrals.
//!
//! Everything here is generic over [`Scalar`]. The building blocks are
//!
//! * [`integrate`]: globally adaptive G10/K21 on a finite interval,
//! * [`integrate_semi_infinite`]: `∫_a^∞` through the map `λ = a + L·(u/(1-u))²`,
//! * [`try_cos_tail`]: `∫_{s0}^∞ cos(s) f(s) ds` summed over half periods between
//!   the zeros of the cosine and accelerated with Wynn's ε-algorithm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Tolerances for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> QuadOptions<T> {
    pub fn new(rel_tol: T) -> Self {
        Self {
            rel_tol: T::clamp_tol(rel_tol),
            abs_tol: T::min_positive_value(),
            max_subdivisions: 2000,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

/// Result of an integration: value plus absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_err: T,
    pub evals: usize,
}

impl<T: Scalar> Estimate<T> {
    fn zero() -> Self {
        Self { value: T::zero(), abs_err: T::zero(), evals: 0 }
    }

    fn add(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
            evals: self.evals + other.evals,
        }
    }

    fn scale(self, k: T) -> Self {
        Self { value: self.value * k, abs_err: self.abs_err * k.abs(), evals: self.evals }
    }
}

// Gauss–Kronrod 21-point abscissae and weights (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    err: T,
    abs: T,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Scalar> Eq for Panel<T> {}
impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn qk21<T: Scalar, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T) -> Result<(T, T, T)> {
    let half = lit::<T>(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center)?;
    let mut res_k = f_center * lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half_len * lit(XGK[jtw]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + lit::<T>(WG[j]) * (f1 + f2);
        res_k = res_k + lit::<T>(WGK[jtw]) * (f1 + f2);
        res_abs = res_abs + lit::<T>(WGK[jtw]) * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half_len * lit(XGK[jtwm1]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + lit::<T>(WGK[jtwm1]) * (f1 + f2);
        res_abs = res_abs + lit::<T>(WGK[jtwm1]) * (f1.abs() + f2.abs());
    }
    let mean = res_k * half;
    let mut res_asc = lit::<T>(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half_len.abs();
    let value = res_k * half_len;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (lit::<T>(200.0) * err / res_asc).powf(lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let round = lit::<T>(50.0) * T::epsilon() * res_abs;
    if round > err {
        err = round;
    }
    if !value.is_finite() {
        return Err(Error::QuadratureFailure {
            requested: 0.0,
            achieved: f64::INFINITY,
            context: format!("non-finite integrand on [{a}, {b}]"),
        });
    }
    Ok((value, err, res_abs))
}

/// Globally adaptive G10/K21 quadrature of a fallible integrand over `[a, b]`.
pub fn try_integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(Estimate::zero());
    }
    let (value, err, mut total_abs) = qk21(&mut f, a, b)?;
    let mut evals = 21;
    let mut total = value;
    let mut total_err = err;
    let mut heap = BinaryHeap::new();
    // Panels that can no longer be bisected in this precision.
    let mut frozen_err = T::zero();
    heap.push(Panel { a, b, value, err, abs: total_abs });
    // nothing better than roundoff relative to ∫|f| is attainable
    let target = |total: T, total_abs: T| {
        opts.abs_tol.max(opts.rel_tol * total.abs()).max(lit::<T>(100.0) * T::epsilon() * total_abs)
    };
    let mut subdivisions = 1;
    while total_err > target(total, total_abs) {
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureFailure {
                requested: opts.rel_tol.to_f64_lossy(),
                achieved: (total_err / total.abs()).to_f64_lossy(),
                context: format!("{subdivisions} subdivisions on [{a}, {b}]"),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = lit::<T>(0.5) * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            frozen_err = frozen_err + worst.err;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1, r1) = qk21(&mut f, worst.a, mid)?;
        let (v2, e2, r2) = qk21(&mut f, mid, worst.b)?;
        evals += 42;
        subdivisions += 1;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.err + e1 + e2;
        total_abs = total_abs - worst.abs + r1 + r2;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1, abs: r1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2, abs: r2 });
    }
    // recompute sums to shed accumulated cancellation in the running totals
    let mut value = T::zero();
    let mut abs_err = frozen_err;
    let mut abs_total = T::zero();
    for p in heap.iter() {
        value = value + p.value;
        abs_err = abs_err + p.err;
        abs_total = abs_total + p.abs;
    }
    if abs_err > target(value, abs_total) * lit(4.0) {
        return Err(Error::QuadratureFailure {
            requested: opts.rel_tol.to_f64_lossy(),
            achieved: (abs_err / value.abs()).to_f64_lossy(),
            context: format!("roundoff limit on [{a}, {b}]"),
        });
    }
    Ok(Estimate { value, abs_err, evals })
}

/// Globally adaptive G10/K21 quadrature over `[a, b]`.
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    try_integrate(|x| Ok(f(x)), a, b, opts)
}

/// Integrate over consecutive breakpoints `[p0, p1], [p1, p2], ...`.
pub fn try_integrate_breaks<T, F>(mut f: F, breaks: &[T], opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let mut acc = Estimate::zero();
    for w in breaks.windows(2) {
        acc = acc.add(try_integrate(&mut f, w[0], w[1], opts)?);
    }
    Ok(acc)
}

/// `∫_a^∞ f(λ) dλ` via `λ = a + scale·(u/(1-u))²`.
///
/// `scale` should be the width over which `f` varies appreciably; the integrand
/// must decay faster than `1/λ`.
pub fn try_integrate_semi_infinite<T, F>(mut f: F, a: T, scale: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let one = T::one();
    let mapped = |u: T| -> Result<T> {
        let w = one - u;
        if w <= T::zero() {
            return Ok(T::zero());
        }
        let r = u / w;
        let lam = a + scale * r * r;
        if !lam.is_finite() {
            return Ok(T::zero());
        }
        // dλ/du = 2·scale·u/(1-u)³
        let v = f(lam)? * lit::<T>(2.0) * scale * r / (w * w);
        Ok(if v.is_finite() { v } else { T::zero() })
    };
    // split so the endpoint behaviour at u → 1 gets its own panel
    let breaks = [T::zero(), lit(0.5), lit(0.9), lit(0.99), one];
    let opts = opts.with_max_subdivisions(opts.max_subdivisions.max(4000));
    try_integrate_breaks(mapped, &breaks, &opts)
}

pub fn integrate_semi_infinite<T, F>(mut f: F, a: T, scale: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), a, scale, opts)
}

/// Wynn's ε-algorithm applied to a sequence of partial sums.
///
/// Returns the entry of the highest even column built from the tail of `sums`.
pub fn wynn_epsilon<T: Scalar>(sums: &[T]) -> T {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&T::zero());
    }
    let mut prev: Vec<T> = vec![T::zero(); n + 1];
    let mut cur: Vec<T> = sums.to_vec();
    let mut best = *sums.last().unwrap();
    let mut column = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == T::zero() {
                // converged exactly; the even column entry is the answer
                return if column % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + T::one() / diff);
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            let cand = *cur.last().unwrap();
            if cand.is_finite() {
                best = cand;
            } else {
                break;
            }
        }
    }
    best
}

/// `∫_{s0}^∞ cos(s) f(s) ds` for `s0 = 2kπ` (any `k ≥ 0`) and `f` smooth and
/// eventually monotone.
///
/// The integral is split at the zeros of the cosine, `(j + 1/2)π`, so successive
/// panel contributions alternate in sign; their partial sums are extrapolated
/// with Wynn's ε-algorithm.
pub fn try_cos_tail<T, F>(mut f: F, s0: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let pi = T::PI();
    let half_pi = pi * lit(0.5);
    let panel_opts = QuadOptions {
        rel_tol: opts.rel_tol * lit(0.01),
        abs_tol: T::min_positive_value(),
        max_subdivisions: 200,
    };
    let mut integrand = |s: T| -> Result<T> { Ok(s.cos() * f(s)?) };
    let first = try_integrate(&mut integrand, s0, s0 + half_pi, &panel_opts)?;
    let mut sum = first.value;
    let mut err = first.abs_err;
    let mut evals = first.evals;
    let mut sums = vec![sum];
    let mut biggest = first.value.abs();
    let mut last_ext = sum;
    let mut agree = 0usize;
    let mut left = s0 + half_pi;
    const MAX_PANELS: usize = 20_000;
    const WINDOW: usize = 24;
    for k in 0..MAX_PANELS {
        let right = left + pi;
        let p = try_integrate(&mut integrand, left, right, &panel_opts)?;
        left = right;
        sum = sum + p.value;
        err = err + p.abs_err;
        evals += p.evals;
        biggest = biggest.max(p.value.abs());
        sums.push(sum);
        let floor = T::epsilon() * lit(100.0) * biggest + opts.abs_tol;
        // panel contributions decayed below resolution: plain summation is done
        if p.value.abs() <= opts.rel_tol * lit(1e-3) * sum.abs() + floor * lit(1e-2) {
            agree += 1;
            if agree >= 3 {
                return Ok(Estimate { value: sum, abs_err: err + p.value.abs(), evals });
            }
            continue;
        }
        let start = sums.len().saturating_sub(WINDOW);
        let ext = wynn_epsilon(&sums[start..]);
        let delta = (ext - last_ext).abs();
        last_ext = ext;
        if k >= 4 && delta <= opts.rel_tol * lit(0.1) * ext.abs() + floor {
            agree += 1;
            if agree >= 2 {
                return Ok(Estimate { value: ext, abs_err: err + delta, evals });
            }
        } else {
            agree = 0;
        }
    }
    Err(Error::QuadratureFailure {
        requested: opts.rel_tol.to_f64_lossy(),
        achieved: ((sums[sums.len() - 1] - last_ext).abs() / last_ext.abs()).to_f64_lossy(),
        context: format!("oscillatory tail from {s0} did not settle in {MAX_PANELS} panels"),
    })
}

/// `∫_0^∞ cos(xλ) g(λ) dλ` for smooth, eventually monotone `g`.
pub fn try_cosine_transform<T, F>(mut g: F, x: T, scale: T, opts: &QuadOptions<T>) -> Result<Estimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let x = x.abs();
    if x == T::zero() {
        return try_integrate_semi_infinite(g, T::zero(), scale, opts);
    }
    // substitute s = xλ so panels sit at the zeros of cos(s)
    let est = try_cos_tail(|s| g(s / x), T::zero(), opts)?;
    Ok(est.scale(T::one() / x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let o = QuadOptions::new(1e-12);
        let z = o.with_abs_tol(1e-14);
        let r = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, &z).unwrap();
        assert_relative_eq!(r.value, 0.0, epsilon = 1e-13);
        let r = integrate(|x: f64| x.powi(4), -1.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, 0.4, max_relative = 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let o = QuadOptions::new(1e-10);
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
        let r = integrate(|x: f64| x.powf(-0.8), 0.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, 5.0, max_relative = 1e-9);
    }

    #[test]
    fn semi_infinite_algebraic_and_exponential() {
        let o = QuadOptions::new(1e-10);
        let r = integrate_semi_infinite(|x: f64| (-x).exp(), 0.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
        let r = integrate_semi_infinite(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, PI / 2.0, max_relative = 1e-10);
        // decay like λ^{-1.5}
        let r = integrate_semi_infinite(|x: f64| x.powf(-1.5), 1.0, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cosine_transform_known_pairs() {
        let o = QuadOptions::new(1e-10);
        // ∫ cos(xλ) e^{-λ} = 1/(1+x²)
        for &x in &[0.3_f64, 1.0, 7.0] {
            let r = try_cosine_transform(|l: f64| Ok((-l).exp()), x, 1.0, &o).unwrap();
            assert_relative_eq!(r.value, 1.0 / (1.0 + x * x), max_relative = 1e-9);
        }
        // ∫ cos(xλ)/(1+λ²) = (π/2) e^{-x}
        for &x in &[0.5_f64, 2.0] {
            let r = try_cosine_transform(|l: f64| Ok(1.0 / (1.0 + l * l)), x, 1.0, &o).unwrap();
            assert_relative_eq!(r.value, PI / 2.0 * (-x).exp(), max_relative = 1e-8);
        }
        // Gaussian: ∫ cos(xλ) e^{-λ²/2} = √(π/2) e^{-x²/2}
        let r = try_cosine_transform(|l: f64| Ok((-l * l / 2.0).exp()), 1.3, 1.0, &o).unwrap();
        assert_relative_eq!(r.value, (PI / 2.0).sqrt() * (-1.3f64 * 1.3 / 2.0).exp(), max_relative = 1e-9);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let o = QuadOptions::new(1e-14).with_max_subdivisions(3);
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &o).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn single_precision_integration() {
        let o = QuadOptions::new(1e-5_f32);
        let r = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, &o).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }
}
