//! Characteristic exponents ψ(λ) of symmetric Lévy processes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// ψ given by a table of knots with log-log interpolation and a power-law tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedExponent<T> {
    lambda: Vec<T>,
    psi: Vec<T>,
    tail_exponent: T,
    anchored: bool,
}

impl<T: Scalar> TabulatedExponent<T> {
    /// Knots must be strictly increasing in λ with ψ > 0, except for an optional
    /// leading origin anchor `(0, 0)`.
    pub fn new(lambda: Vec<T>, psi: Vec<T>, tail_exponent: T) -> Result<Self> {
        if lambda.len() != psi.len() {
            return Err(Error::domain("tabulated exponent: λ and ψ columns differ in length"));
        }
        if !(tail_exponent > T::one()) || !tail_exponent.is_finite() {
            return Err(Error::domain(format!(
                "tabulated exponent: tail exponent must exceed 1, got {tail_exponent}"
            )));
        }
        let anchored = lambda.first().is_some_and(|l| *l == T::zero());
        if anchored && psi[0] != T::zero() {
            return Err(Error::domain("tabulated exponent: ψ(0) must be 0"));
        }
        let first = usize::from(anchored);
        if lambda.len() <= first {
            return Err(Error::domain("tabulated exponent: need at least one knot with λ > 0"));
        }
        for i in first..lambda.len() {
            let (l, p) = (lambda[i], psi[i]);
            if !(l > T::zero() && l.is_finite()) {
                return Err(Error::domain(format!("tabulated exponent: invalid λ knot {l}")));
            }
            if !(p > T::zero() && p.is_finite()) {
                return Err(Error::domain(format!("tabulated exponent: ψ({l}) = {p} must be positive")));
            }
            if i > 0 && !(l > lambda[i - 1]) {
                return Err(Error::domain("tabulated exponent: λ knots must be strictly increasing"));
            }
        }
        Ok(Self { lambda, psi, tail_exponent, anchored })
    }

    pub fn knots(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.lambda.iter().copied().zip(self.psi.iter().copied())
    }

    pub fn tail_exponent(&self) -> T {
        self.tail_exponent
    }

    /// Whether the table starts with the origin anchor `(0, 0)`.
    pub fn anchored(&self) -> bool {
        self.anchored
    }

    fn first_positive(&self) -> usize {
        usize::from(self.anchored)
    }

    fn last_lambda(&self) -> T {
        *self.lambda.last().unwrap()
    }

    /// Power-law pieces `ψ = ψ_ref (λ/λ_ref)^k` covering `[lo, hi)`; the final
    /// piece has `hi = ∞`.
    fn pieces(&self) -> Vec<Piece<T>> {
        let f = self.first_positive();
        let mut out = Vec::with_capacity(self.lambda.len() + 1);
        if self.anchored {
            out.push(Piece { lo: T::zero(), hi: self.lambda[f], l_ref: self.lambda[f], p_ref: self.psi[f], k: lit(2.0) });
        }
        for i in f..self.lambda.len() - 1 {
            let k = (self.psi[i + 1] / self.psi[i]).ln() / (self.lambda[i + 1] / self.lambda[i]).ln();
            out.push(Piece { lo: self.lambda[i], hi: self.lambda[i + 1], l_ref: self.lambda[i], p_ref: self.psi[i], k });
        }
        let n = self.lambda.len() - 1;
        out.push(Piece {
            lo: self.lambda[n],
            hi: T::infinity(),
            l_ref: self.lambda[n],
            p_ref: self.psi[n],
            k: self.tail_exponent,
        });
        out
    }

    fn eval(&self, lam: T) -> Result<T> {
        let f = self.first_positive();
        let l0 = self.lambda[f];
        if lam < l0 {
            if self.anchored {
                // quadratic approach to the origin anchor
                let r = lam / l0;
                return Ok(self.psi[f] * r * r);
            }
            return Err(Error::domain(format!(
                "tabulated exponent: λ = {lam} is below the first knot {l0} and the table has no origin anchor"
            )));
        }
        let n = self.lambda.len() - 1;
        if lam >= self.lambda[n] {
            return Ok(self.psi[n] * (lam / self.lambda[n]).powf(self.tail_exponent));
        }
        let i = self.lambda.partition_point(|&l| l <= lam) - 1;
        let (l_i, l_j) = (self.lambda[i], self.lambda[i + 1]);
        let (p_i, p_j) = (self.psi[i], self.psi[i + 1]);
        let w = (lam / l_i).ln() / (l_j / l_i).ln();
        Ok((p_i.ln() + w * (p_j / p_i).ln()).exp())
    }

    /// Parse the two-column CSV format (`lambda,psi` header, trailing
    /// `#tail_exponent=<γ>` line).
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some(h) if h.replace(' ', "").eq_ignore_ascii_case("lambda,psi") => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `lambda,psi`, found {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut lambda = Vec::new();
        let mut psi = Vec::new();
        let mut tail = None;
        for (lineno, line) in lines.enumerate() {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some(v) = meta.trim().strip_prefix("tail_exponent=") {
                    let g: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad tail exponent `{v}`")))?;
                    tail = Some(g);
                }
                continue;
            }
            if tail.is_some() {
                return Err(Error::Parse("data after the #tail_exponent line".into()));
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 2)));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", lineno + 2)))
            };
            lambda.push(lit(parse(a)?));
            psi.push(lit(parse(b)?));
        }
        let tail = tail.ok_or_else(|| Error::Parse("missing `#tail_exponent=<γ>` line".into()))?;
        Self::new(lambda, psi, lit(tail))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("lambda,psi\n");
        for (l, p) in self.knots() {
            let _ = writeln!(s, "{},{}", l.to_f64_lossy(), p.to_f64_lossy());
        }
        let _ = writeln!(s, "#tail_exponent={}", self.tail_exponent.to_f64_lossy());
        s
    }
}

/// The Lévy exponent ψ in `E exp(iλX(t)) = exp(-tψ(λ))`.
#[derive(Debug, Clone, PartialEq)]
pub enum CharacteristicExponent<T> {
    /// ψ(λ) = |λ|^β.
    CanonicalStable { beta: T },
    /// ψ(λ) = λ²/2 (standard Brownian motion).
    BrownianHalf,
    /// ψ(λ) = c|λ|^β.
    ScaledStable { c: T, beta: T },
    Tabulated(TabulatedExponent<T>),
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if beta > T::one() && beta <= lit(2.0) {
        Ok(())
    } else {
        Err(Error::domain(format!("stable index β = {beta} must lie in (1, 2]")))
    }
}

impl<T: Scalar> CharacteristicExponent<T> {
    pub fn canonical_stable(beta: T) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self::CanonicalStable { beta })
    }

    pub fn brownian_half() -> Self {
        Self::BrownianHalf
    }

    pub fn scaled_stable(c: T, beta: T) -> Result<Self> {
        check_beta(beta)?;
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::domain(format!("scale c = {c} must be positive")));
        }
        Ok(Self::ScaledStable { c, beta })
    }

    pub fn tabulated(table: TabulatedExponent<T>) -> Self {
        Self::Tabulated(table)
    }

    /// `(c, β)` with ψ = c|λ|^β, for the stable families.
    pub fn stable_view(&self) -> Option<(T, T)> {
        match self {
            Self::CanonicalStable { beta } => Some((T::one(), *beta)),
            Self::BrownianHalf => Some((lit(0.5), lit(2.0))),
            Self::ScaledStable { c, beta } => Some((*c, *beta)),
            Self::Tabulated(_) => None,
        }
    }

    /// Growth exponent of ψ at infinity.
    pub fn tail_exponent(&self) -> T {
        match self {
            Self::Tabulated(t) => t.tail_exponent(),
            _ => self.stable_view().unwrap().1,
        }
    }

    /// ψ(λ); even in λ.
    pub fn psi(&self, lam: T) -> Result<T> {
        let lam = lam.abs();
        if lam.is_nan() {
            return Err(Error::domain("ψ evaluated at NaN"));
        }
        match self {
            Self::Tabulated(t) => t.eval(lam),
            _ => {
                let (c, beta) = self.stable_view().unwrap();
                if beta == lit(2.0) {
                    Ok(c * lam * lam)
                } else {
                    Ok(c * lam.powf(beta))
                }
            }
        }
    }

    /// Check that ψ can be evaluated on all of `[0, ∞)`.
    pub(crate) fn require_full_domain(&self) -> Result<()> {
        match self {
            Self::Tabulated(t) if !t.anchored() => Err(Error::domain(
                "tabulated exponent has no origin anchor, so ψ is undefined below the first knot",
            )),
            _ => Ok(()),
        }
    }

    /// Exact `∫_Λ^∞ dλ/ψ(λ)` for `Λ > 0`.
    pub fn inverse_tail(&self, big_lambda: T) -> T {
        let one = T::one();
        match self {
            Self::Tabulated(t) => {
                let mut acc = T::zero();
                for piece in t.pieces() {
                    if piece.hi <= big_lambda {
                        continue;
                    }
                    let lo = piece.lo.max(big_lambda);
                    if lo == T::zero() {
                        return T::infinity();
                    }
                    acc = acc + piece.inverse_integral(lo, piece.hi);
                }
                acc
            }
            _ => {
                let (c, beta) = self.stable_view().unwrap();
                big_lambda.powf(one - beta) / (c * (beta - one))
            }
        }
    }

    /// Smallest λ with ψ(λ) ≥ y (a scale hint; exact for the stable families).
    pub fn inverse_psi(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        match self {
            Self::Tabulated(t) => {
                for piece in t.pieces() {
                    let p_hi = if piece.hi.is_infinite() { T::infinity() } else { piece.value(piece.hi) };
                    if p_hi >= y && piece.k > T::zero() {
                        let lam = piece.l_ref * (y / piece.p_ref).powf(T::one() / piece.k);
                        return lam.max(piece.lo);
                    }
                }
                t.last_lambda()
            }
            _ => {
                let (c, beta) = self.stable_view().unwrap();
                (y / c).powf(T::one() / beta)
            }
        }
    }

    /// Largest λ below which ψ has table structure (0 for the stable families).
    pub fn structure_scale(&self) -> T {
        match self {
            Self::Tabulated(t) => t.last_lambda(),
            _ => T::zero(),
        }
    }

    /// Short descriptor used in reports and fixture keys.
    pub fn describe(&self) -> String {
        match self {
            Self::CanonicalStable { beta } => format!("stable(beta={})", beta.to_f64_lossy()),
            Self::BrownianHalf => "brownian-half".into(),
            Self::ScaledStable { c, beta } => {
                format!("scaled-stable(c={},beta={})", c.to_f64_lossy(), beta.to_f64_lossy())
            }
            Self::Tabulated(t) => format!(
                "tabulated(knots={},tail={})",
                t.lambda.len(),
                t.tail_exponent.to_f64_lossy()
            ),
        }
    }
}

struct Piece<T> {
    lo: T,
    hi: T,
    l_ref: T,
    p_ref: T,
    k: T,
}

impl<T: Scalar> Piece<T> {
    fn value(&self, lam: T) -> T {
        self.p_ref * (lam / self.l_ref).powf(self.k)
    }

    // ∫_lo^hi dλ/ψ over this piece
    fn inverse_integral(&self, lo: T, hi: T) -> T {
        let one = T::one();
        let coef = self.l_ref.powf(self.k) / self.p_ref;
        if (self.k - one).abs() < lit(1e-12) {
            return coef * (hi / lo).ln();
        }
        let e = one - self.k;
        let upper = if hi.is_infinite() { T::zero() } else { hi.powf(e) };
        coef * (upper - lo.powf(e)) / e
    }
}
