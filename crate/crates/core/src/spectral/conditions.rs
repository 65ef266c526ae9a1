//! Numerical trend checks for the regularity conditions on σ₀ and ψ.
//!
//! These produce evidence, not proofs: a sequence of ratios and a verdict.

use serde::Serialize;

use super::exponent::CharacteristicExponent;
use super::structure::StructureFunction;
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Verdict thresholds: "holds" needs a non-increasing ratio sequence ending
/// below `holds_below`; "fails" needs a non-decreasing sequence bounded below
/// by `fails_above`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub holds_below: f64,
    pub fails_above: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { holds_below: 0.01, fails_above: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    /// log10 of the abscissa (n for C_q, λ for Λ_γ).
    pub log10_x: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub points: Vec<TrendPoint>,
    pub verdict: Verdict,
}

fn classify(ratios: &[f64], th: Thresholds) -> Verdict {
    if ratios.is_empty() || ratios.iter().any(|r| !r.is_finite()) {
        return Verdict::Inconclusive;
    }
    let slack = 1e-12;
    let non_increasing = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack));
    let non_decreasing = ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack));
    let last = *ratios.last().unwrap();
    if non_increasing && last < th.holds_below {
        Verdict::Holds
    } else if non_decreasing && ratios.iter().all(|r| *r >= th.fails_above) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// C_q: σ(1/(n (log n)^{q+1})) / σ(1/(log n)^q) at n = 10², …, 10^{n_max}.
///
/// Evaluated through ln σ²(ln h), so `n_max` may exceed the floating-point
/// exponent range when σ supports it.
pub fn check_condition_cq<T: Scalar>(
    sigma: &StructureFunction<T>,
    q: T,
    n_max: u32,
    th: Thresholds,
) -> Result<TrendReport> {
    if !(q > T::one()) {
        return Err(Error::domain(format!("C_q needs q > 1, got {q}")));
    }
    if n_max < 2 {
        return Err(Error::domain("C_q needs n_max ≥ 2"));
    }
    let mut points = Vec::new();
    let ln10 = T::LN_10();
    for k in 2..=n_max {
        let ln_n = ln10 * lit(f64::from(k));
        let lnln_n = ln_n.ln();
        let ln_h1 = -(ln_n + (q + T::one()) * lnln_n);
        let ln_h2 = -(q * lnln_n);
        let ratio = (lit::<T>(0.5) * (sigma.ln_sigma_sq(ln_h1)? - sigma.ln_sigma_sq(ln_h2)?)).exp();
        points.push(TrendPoint { log10_x: f64::from(k), ratio: ratio.to_f64_lossy() });
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    Ok(TrendReport { verdict: classify(&ratios, th), points })
}

/// Λ_γ: λ^γ/ψ(λ) on the geometric grid λ = 10^k, k = 0, …, up to `lambda_max`.
pub fn check_condition_lambda_gamma<T: Scalar>(
    exp: &CharacteristicExponent<T>,
    gamma: T,
    lambda_max: T,
    th: Thresholds,
) -> Result<TrendReport> {
    if !(gamma > T::zero()) {
        return Err(Error::domain(format!("Λ_γ needs γ > 0, got {gamma}")));
    }
    if !(lambda_max > lit(10.0)) {
        return Err(Error::domain("Λ_γ needs λ_max > 10"));
    }
    let k_max = lambda_max.log10().floor().to_i32().unwrap_or(0);
    let mut points = Vec::new();
    for k in 0..=k_max {
        let lam = lit::<T>(10.0).powi(k);
        let ratio = (gamma * lam.ln() - exp.psi(lam)?.ln()).exp();
        points.push(TrendPoint { log10_x: f64::from(k), ratio: ratio.to_f64_lossy() });
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    Ok(TrendReport { verdict: classify(&ratios, th), points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub concave: bool,
    pub monotone: bool,
    /// Largest second difference σ²(h+d) + σ²(h−d) − 2σ²(h) on the grid.
    pub worst_second_difference: f64,
    /// Acceptance threshold derived from the evaluation tolerance.
    pub threshold: f64,
}

/// Discrete concavity and monotonicity of σ² on a uniform grid of `[0, δ]`.
///
/// Each σ² value carries relative error ≤ tol, so a second difference is
/// resolved only to 4·tol·max σ²; that is the acceptance threshold.
pub fn check_concavity<T: Scalar>(sigma: &StructureFunction<T>, delta: T, grid: usize) -> Result<ConcavityReport> {
    if !(delta > T::zero()) {
        return Err(Error::domain(format!("concavity check needs δ > 0, got {delta}")));
    }
    if grid < 2 {
        return Err(Error::domain("concavity check needs at least 2 grid intervals"));
    }
    let d = delta / lit(grid as f64);
    let vals = (0..=grid).map(|i| sigma.sigma_sq(d * lit(i as f64))).collect::<Result<Vec<T>>>()?;
    let max = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let threshold = lit::<T>(4.0) * sigma.tolerance() * max;
    let mut worst = T::neg_infinity();
    for w in vals.windows(3) {
        worst = worst.max(w[2] + w[0] - lit::<T>(2.0) * w[1]);
    }
    let monotone = vals.windows(2).all(|w| w[1] >= w[0] - threshold);
    Ok(ConcavityReport {
        concave: worst <= threshold,
        monotone,
        worst_second_difference: worst.to_f64_lossy(),
        threshold: threshold.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stable(b: f64) -> CharacteristicExponent<f64> {
        CharacteristicExponent::canonical_stable(b).unwrap()
    }

    #[test]
    fn cq_examples() {
        let th = Thresholds::default();
        let s = StructureFunction::sigma0(stable(2.0));
        let r = check_condition_cq(&s, 3.0, 12, th).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.points.len(), 11);

        // σ(h) = (log 1/h)^{-1}
        let inv_log = StructureFunction::custom("inv-log", |ln_h: f64| 1.0 / (ln_h * ln_h));
        let r = check_condition_cq(&inv_log, 3.0, 1200, th).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.points.last().unwrap().ratio < 0.01);
        // not yet below the threshold at moderate n
        assert_eq!(check_condition_cq(&inv_log, 3.0, 50, th).unwrap().verdict, Verdict::Inconclusive);

        let constant = StructureFunction::custom("one", |_| 1.0);
        assert_eq!(check_condition_cq(&constant, 3.0, 10, th).unwrap().verdict, Verdict::Fails);
        assert!(check_condition_cq(&constant, 1.0, 10, th).is_err());
    }

    #[test]
    fn lambda_gamma_examples() {
        let th = Thresholds::default();
        let v = |e: &CharacteristicExponent<f64>, g| check_condition_lambda_gamma(e, g, 1e8, th).unwrap().verdict;
        assert_eq!(v(&stable(1.5), 1.0), Verdict::Holds);
        assert_eq!(v(&stable(1.5), 1.5), Verdict::Fails);
        assert_eq!(v(&CharacteristicExponent::brownian_half(), 1.5), Verdict::Holds);
    }

    #[test]
    fn thresholds_are_configurable() {
        let strict = Thresholds { holds_below: 1e-6, fails_above: 0.1 };
        let r = check_condition_lambda_gamma(&stable(1.5), 1.0, 1e8, strict).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn concavity_examples() {
        let c = |s: StructureFunction<f64>| check_concavity(&s, 1.0, 100).unwrap();
        let r = c(StructureFunction::power_law(0.5).unwrap());
        assert!(r.concave && r.monotone);
        assert!(!c(StructureFunction::power_law(1.5).unwrap()).concave);
        let r = c(StructureFunction::scaled_power_law(2.0, 1.0).unwrap());
        assert!(r.concave && r.monotone);
        for b in [1.2, 1.5, 2.0] {
            let s = StructureFunction::sigma0(stable(b));
            assert!(check_concavity(&s, 1.0, 16).unwrap().concave);
        }
    }
}
