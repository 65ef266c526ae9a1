//! Gamma function for real arguments (Lanczos approximation, g = 7, n = 9).

use crate::scalar::{lit, Scalar};

const LANCZOS_G: f64 = 7.0;

#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Scalar>(x: T) -> T {
    // x is the shifted argument (z - 1)
    let mut acc = lit::<T>(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + lit(i as f64));
    }
    acc
}

/// Γ(x) for real `x`, using reflection below 1/2. Poles return NaN.
pub fn gamma<T: Scalar>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x <= T::zero() && x == x.floor() {
        return T::nan();
    }
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    // exact factorials at small integers
    if x == x.floor() && x <= lit(24.0) {
        let n = x.to_u32().unwrap_or(1);
        return (2..n).fold(T::one(), |acc, k| acc * lit(k as f64));
    }
    let z = x - T::one();
    let t = z + lit(LANCZOS_G) + half;
    let sqrt_two_pi = (lit::<T>(2.0) * T::PI()).sqrt();
    sqrt_two_pi * t.powf(z + half) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + lit(LANCZOS_G) + half;
    half * (lit::<T>(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}
