//! Spectral integrals of ψ: structure functions, potential and transition
//! densities, and the expected local time V(t).

use super::exponent::CharacteristicExponent;
use crate::error::{Error, Result};
use crate::quadrature::{
    try_cos_tail, try_cosine_transform, try_integrate, try_integrate_breaks, try_integrate_semi_infinite, Estimate,
    QuadOptions,
};
use crate::scalar::{lit, Scalar};
use crate::special::gamma;

/// Default relative tolerance for spectral quadrature.
pub const DEFAULT_TOL: f64 = 1e-9;

// Head panels of the sin² transform are capped; beyond this the tail
// extrapolation takes over even if ψ still has table structure.
const MAX_HEAD_PERIODS: usize = 200_000;

/// Spectral weight g(λ) multiplying the Fourier kernel.
#[derive(Debug, Clone, Copy)]
enum Weight<T> {
    /// 1/ψ
    Inverse,
    /// 1/(α+ψ)
    Resolvent(T),
    /// α/(ψ(α+ψ)) = 1/ψ − 1/(α+ψ)
    Complement(T),
    /// exp(−tψ)
    Heat(T),
}

impl<T: Scalar> Weight<T> {
    fn eval(self, exp: &CharacteristicExponent<T>, lam: T) -> Result<T> {
        let psi = exp.psi(lam)?;
        Ok(match self {
            Weight::Inverse => T::one() / psi,
            Weight::Resolvent(a) => T::one() / (a + psi),
            Weight::Complement(a) => a / (psi * (a + psi)),
            Weight::Heat(t) => (-t * psi).exp(),
        })
    }

    /// λ beyond which g has no structure other than the power tail of ψ.
    fn knee(self, exp: &CharacteristicExponent<T>) -> T {
        let k = match self {
            Weight::Inverse => T::zero(),
            Weight::Resolvent(a) | Weight::Complement(a) => exp.inverse_psi(a) * lit(4.0),
            Weight::Heat(t) => exp.inverse_psi(lit::<T>(4.0) / t),
        };
        k.max(exp.structure_scale())
    }

    /// `∫_Λ^∞ g(λ) dλ` for `Λ > 0`.
    fn tail(self, exp: &CharacteristicExponent<T>, big_lambda: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
        match self {
            Weight::Inverse => Ok(exact(exp.inverse_tail(big_lambda))),
            Weight::Resolvent(a) => {
                let c = Weight::Complement(a).tail(exp, big_lambda, opts)?;
                Ok(Estimate { value: exp.inverse_tail(big_lambda) - c.value, ..c })
            }
            Weight::Complement(_) | Weight::Heat(_) => {
                try_integrate_semi_infinite(|l| self.eval(exp, l), big_lambda, big_lambda, opts)
            }
        }
    }
}

fn exact<T: Scalar>(value: T) -> Estimate<T> {
    Estimate { value, abs_err: T::zero(), evals: 0 }
}

fn check_tol<T: Scalar>(est: Estimate<T>, tol: T, context: &str) -> Result<T> {
    if !est.value.is_finite() {
        return Err(Error::QuadratureFailure {
            requested: tol.to_f64_lossy(),
            achieved: f64::INFINITY,
            context: context.into(),
        });
    }
    if est.abs_err > tol * est.value.abs() {
        return Err(Error::QuadratureFailure {
            requested: tol.to_f64_lossy(),
            achieved: (est.abs_err / est.value.abs()).to_f64_lossy(),
            context: context.into(),
        });
    }
    Ok(est.value)
}

/// `(4/π) ∫_0^∞ sin²(λh/2) g(λ) dλ`.
///
/// With `s = λh` the integrand becomes `sin²(s/2) g(s/h)/h`. Whole periods
/// `[2kπ, 2(k+1)π]` are integrated directly up to the knee of `g`; beyond that
/// `sin² = (1 − cos)/2` splits the tail into a non-oscillatory part (exact or
/// semi-infinite quadrature) and a cosine tail summed over half periods.
fn sin_sq_transform<T: Scalar>(exp: &CharacteristicExponent<T>, w: Weight<T>, h: T, tol: T) -> Result<Estimate<T>> {
    let h = h.abs();
    if h == T::zero() {
        return Ok(exact(T::zero()));
    }
    exp.require_full_domain()?;
    let tol = T::clamp_tol(tol);
    let two_pi = T::TAU();
    let half = lit::<T>(0.5);
    let periods = (h * w.knee(exp) / two_pi).ceil().to_usize().unwrap_or(MAX_HEAD_PERIODS);
    let periods = periods.clamp(2, MAX_HEAD_PERIODS);
    let panel_opts = QuadOptions::new(tol * lit(0.05));
    let g = |s: T| w.eval(exp, s / h);

    let mut head = Estimate { value: T::zero(), abs_err: T::zero(), evals: 0 };
    for k in 0..periods {
        let a = two_pi * lit(k as f64);
        let p = try_integrate(|s: T| Ok((s * half).sin().powi(2) * g(s)?), a, a + two_pi, &panel_opts)?;
        head = Estimate { value: head.value + p.value, abs_err: head.abs_err + p.abs_err, evals: head.evals + p.evals };
    }

    let s0 = two_pi * lit(periods as f64);
    let flat = w.tail(exp, s0 / h, &panel_opts)?;
    let cos_opts = QuadOptions::new(tol * lit(0.05)).with_abs_tol(tol * lit(1e-3) * head.value.abs());
    let osc = try_cos_tail(g, s0, &cos_opts)?;

    // (4/(πh)) [head + ½·h·∫_{s0/h}^∞ g − ½·∫_{s0}^∞ cos(s) g(s/h) ds]
    let inner = head.value + half * h * flat.value - half * osc.value;
    let err = head.abs_err + half * h * flat.abs_err + half * osc.abs_err;
    let k = lit::<T>(4.0) / (T::PI() * h);
    Ok(Estimate { value: k * inner, abs_err: k * err, evals: head.evals + flat.evals + osc.evals })
}

/// `∫_0^∞ g(λ) dλ`.
fn full_integral<T: Scalar>(exp: &CharacteristicExponent<T>, w: Weight<T>, tol: T) -> Result<Estimate<T>> {
    exp.require_full_domain()?;
    let opts = QuadOptions::new(tol * lit(0.05));
    let knee = w.knee(exp);
    let knee = if knee > T::zero() { knee } else { T::one() };
    let mut breaks = vec![T::zero()];
    if let CharacteristicExponent::Tabulated(t) = exp {
        breaks.extend(t.knots().map(|(l, _)| l).filter(|l| *l > T::zero() && *l < knee));
    }
    breaks.push(knee);
    let head = try_integrate_breaks(|l| w.eval(exp, l), &breaks, &opts)?;
    let tail = w.tail(exp, knee, &opts)?;
    Ok(Estimate {
        value: head.value + tail.value,
        abs_err: head.abs_err + tail.abs_err,
        evals: head.evals + tail.evals,
    })
}

/// σ₀²(h) = (4/π) ∫_0^∞ sin²(λh/2)/ψ(λ) dλ.
pub fn sigma0_sq<T: Scalar>(exp: &CharacteristicExponent<T>, h: T, tol: T) -> Result<T> {
    check_tol(sin_sq_transform(exp, Weight::Inverse, h, tol)?, T::clamp_tol(tol), "sigma0_sq")
}

/// σ_α²(h): as [`sigma0_sq`] with denominator α + ψ.
pub fn sigma_alpha_sq<T: Scalar>(exp: &CharacteristicExponent<T>, alpha: T, h: T, tol: T) -> Result<T> {
    check_alpha(alpha)?;
    check_tol(sin_sq_transform(exp, Weight::Resolvent(alpha), h, tol)?, T::clamp_tol(tol), "sigma_alpha_sq")
}

/// σ̃_α²(h) = (4/π) ∫ sin²(λh/2) α/(ψ(α+ψ)) dλ, so σ₀² = σ_α² + σ̃_α².
pub fn sigma_tilde_sq<T: Scalar>(exp: &CharacteristicExponent<T>, alpha: T, h: T, tol: T) -> Result<T> {
    check_alpha(alpha)?;
    check_tol(sin_sq_transform(exp, Weight::Complement(alpha), h, tol)?, T::clamp_tol(tol), "sigma_tilde_sq")
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("α = {alpha} must be positive")))
    }
}

fn check_stable_beta<T: Scalar>(beta: T) -> Result<()> {
    if beta > T::one() && beta <= lit(2.0) {
        Ok(())
    } else {
        Err(Error::domain(format!("β = {beta} must lie in (1, 2]")))
    }
}

/// Closed form of σ₀² for ψ = |λ|^β: h^{β−1}/(Γ(β) sin(π(β−1)/2)).
pub fn sigma0_sq_stable_closed<T: Scalar>(beta: T, h: T) -> Result<T> {
    check_stable_beta(beta)?;
    let h = h.abs();
    if h == T::zero() {
        return Ok(T::zero());
    }
    let b1 = beta - T::one();
    Ok(h.powf(b1) / (gamma(beta) * (T::FRAC_PI_2() * b1).sin()))
}

/// α-potential density u^α(x) = (1/π) ∫_0^∞ cos(λx)/(α+ψ(λ)) dλ.
pub fn u_alpha<T: Scalar>(exp: &CharacteristicExponent<T>, alpha: T, x: T, tol: T) -> Result<T> {
    check_alpha(alpha)?;
    fourier_density(exp, Weight::Resolvent(alpha), x, tol, "u_alpha")
}

/// Transition density p_t(x) = (1/π) ∫_0^∞ cos(λx) exp(−tψ(λ)) dλ.
pub fn transition_density<T: Scalar>(exp: &CharacteristicExponent<T>, t: T, x: T, tol: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::domain(format!("transition density needs t > 0, got {t}")));
    }
    fourier_density(exp, Weight::Heat(t), x, tol, "transition_density")
}

fn fourier_density<T: Scalar>(
    exp: &CharacteristicExponent<T>,
    w: Weight<T>,
    x: T,
    tol: T,
    context: &str,
) -> Result<T> {
    let tol = T::clamp_tol(tol);
    let est = if x == T::zero() {
        full_integral(exp, w, tol)?
    } else {
        exp.require_full_domain()?;
        let knee = w.knee(exp);
        let scale = if knee > T::zero() { knee } else { T::one() };
        let opts = QuadOptions::new(tol * lit(0.1));
        try_cosine_transform(|l| w.eval(exp, l), x, scale, &opts)?
    };
    let est = Estimate { value: est.value / T::PI(), abs_err: est.abs_err / T::PI(), evals: est.evals };
    // densities far out in the tail are tiny; accept absolute accuracy there
    if x != T::zero() && est.abs_err <= tol * lit(1e-3) {
        return Ok(est.value);
    }
    check_tol(est, tol, context)
}

/// V(t) = ∫_0^t p_s(0) ds, the expected local time at the starting point.
pub fn v_of_t<T: Scalar>(exp: &CharacteristicExponent<T>, t: T, tol: T) -> Result<T> {
    if t < T::zero() {
        return Err(Error::domain(format!("V(t) needs t ≥ 0, got {t}")));
    }
    let gam = exp.tail_exponent();
    if gam <= T::one() {
        return Err(Error::domain("V(t) is infinite when ψ grows no faster than |λ|"));
    }
    if t == T::zero() {
        return Ok(T::zero());
    }
    if let Some((c, beta)) = exp.stable_view() {
        let one = T::one();
        let ib = one / beta;
        return Ok(gamma(one + ib) / T::PI() * (beta / (beta - one)) * t.powf(one - ib) * c.powf(-ib));
    }
    v_of_t_quadrature(exp, t, tol)
}

/// V(t) by quadrature of p_s(0), with s = u^{γ/(γ−1)} absorbing the s^{−1/γ}
/// singularity at s = 0.
pub fn v_of_t_quadrature<T: Scalar>(exp: &CharacteristicExponent<T>, t: T, tol: T) -> Result<T> {
    let tol = T::clamp_tol(tol);
    let one = T::one();
    let gam = exp.tail_exponent();
    let m = gam / (gam - one);
    let u_max = t.powf(one / m);
    let opts = QuadOptions::new(tol * lit(0.1));
    let inner_tol = tol * lit(0.01);
    let est = try_integrate(
        |u: T| {
            if u == T::zero() {
                return Ok(T::zero());
            }
            let s = u.powf(m);
            let ds = m * u.powf(m - one);
            Ok(transition_density(exp, s, T::zero(), inner_tol)? * ds)
        },
        T::zero(),
        u_max,
        &opts,
    )?;
    check_tol(est, tol, "v_of_t")
}
