//! Experiment configuration: flat `key = value` text with validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::path::grid_steps;
use crate::levy::{default_epsilon, smallest_resolvable_lag};
use crate::spectral::{CharacteristicExponent, StructureFunction, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GaussianMean,
    GaussianConvergence,
    SquaredGaussian,
    LocaltimeConvergence,
    QuadraticVariation,
    LmDecay,
    CovarianceBound,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::GaussianMean,
        Self::GaussianConvergence,
        Self::SquaredGaussian,
        Self::LocaltimeConvergence,
        Self::QuadraticVariation,
        Self::LmDecay,
        Self::CovarianceBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianMean => "gaussian-mean",
            Self::GaussianConvergence => "gaussian-convergence",
            Self::SquaredGaussian => "squared-gaussian",
            Self::LocaltimeConvergence => "localtime-convergence",
            Self::QuadraticVariation => "quadratic-variation",
            Self::LmDecay => "lm-decay",
            Self::CovarianceBound => "covariance-bound",
        }
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, Self::GaussianMean | Self::GaussianConvergence | Self::SquaredGaussian)
    }

    pub fn is_levy(self) -> bool {
        matches!(self, Self::LocaltimeConvergence | Self::QuadraticVariation | Self::LmDecay)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Process family of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Gaussian with σ²(h) = h^r.
    Fbm { r: f64 },
    /// Gaussian with σ² = σ_α² of the canonical β-stable exponent.
    Potential { beta: f64, alpha: f64 },
    /// Standard Brownian motion, ψ = λ²/2.
    BrownianHalf,
    /// Canonical β-stable, ψ = |λ|^β.
    Stable { beta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fbm { .. } => "fbm",
            Self::Potential { .. } => "potential",
            Self::BrownianHalf => "brownian-half",
            Self::Stable { .. } => "stable",
        }
    }

    pub fn exponent(&self) -> Result<CharacteristicExponent<f64>> {
        match *self {
            Self::BrownianHalf => Ok(CharacteristicExponent::brownian_half()),
            Self::Stable { beta } | Self::Potential { beta, .. } => CharacteristicExponent::canonical_stable(beta),
            Self::Fbm { .. } => Err(Error::Config("fbm has no characteristic exponent".into())),
        }
    }

    /// σ² of the Gaussian family, or σ₀² of a Lévy family.
    pub fn structure(&self, tol: f64) -> Result<StructureFunction<f64>> {
        match *self {
            Self::Fbm { r } => StructureFunction::power_law(r),
            Self::Potential { alpha, .. } => StructureFunction::spectral(self.exponent()?, alpha, tol),
            Self::Stable { beta } => StructureFunction::closed_form_stable(beta),
            Self::BrownianHalf => StructureFunction::scaled_power_law(2.0, 1.0),
        }
    }

    /// β of a Lévy family.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            Self::BrownianHalf => Some(2.0),
            Self::Stable { beta } => Some(beta),
            _ => None,
        }
    }
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub family: Family,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// Time horizon of Lévy paths.
    pub t: f64,
    /// Grid steps: spatial steps on [a, b] for Gaussian kinds, time steps for Lévy kinds.
    pub n: usize,
    /// Local-time bin width.
    pub epsilon: f64,
    /// Lags, strictly decreasing.
    pub h: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    /// Relative band for limit-ratio rows.
    pub tolerance: f64,
    /// Required std(first h)/std(last h) for variance decay.
    pub std_ratio: f64,
    /// Moment orders for lm-decay.
    pub m: Vec<u32>,
    pub t_grid: Vec<f64>,
    /// Spatial cells per unit for quadratic variation.
    pub qv_m: f64,
    /// Concave structure functions for covariance-bound, as `c*h^r` specs.
    pub concave: Vec<String>,
    pub convex_r: f64,
    pub quad_tol: f64,
}

/// Recognized keys, in echo order.
pub const KEYS: [&str; 22] = [
    "kind", "family", "r", "beta", "alpha", "p", "a", "b", "t", "n", "epsilon", "h", "h_steps", "replicas", "seed",
    "tolerance", "std_ratio", "m", "t_grid", "qv_m", "concave", "convex_r",
];

const EXTRA_KEYS: [&str; 1] = ["quad_tol"];

/// Raw `key = value` pairs; later entries override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigPairs(pub BTreeMap<String, String>);

impl ConfigPairs {
    /// Parse flat text: one `key = value` per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
            out.set(k.trim(), v.trim())?;
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) && !EXTRA_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfigPairs) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        self.0
            .get(key)
            .map(|s| s.parse::<V>().map_err(|_| Error::Config(format!("bad value `{s}` for `{key}`"))))
            .transpose()
    }

    fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>> {
        self.0
            .get(key)
            .map(|s| {
                s.split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<V>().map_err(|_| Error::Config(format!("bad entry `{x}` in `{key}`"))))
                    .collect()
            })
            .transpose()
    }
}

fn join<V: ToString>(xs: &[V]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn check_r(r: f64) -> Result<()> {
    if r == 2.0 {
        return Err(Error::Config(
            "σ²(h) = h² is degenerate: the increments are those of a random line and the modulus limit is not constant".into(),
        ));
    }
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::Config(format!("fbm exponent r = {r} must lie in (0, 2)")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Config(format!("β = {beta} must lie in (1, 2]")));
    }
    Ok(())
}

/// Parse `c*h^r`, `ch^r`, `h^r`, `ch` or `h`.
pub fn parse_power_spec(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("bad structure function `{s}`; expected c*h^r"));
    let t = s.replace(' ', "");
    let (coef, rest) = match t.find('h') {
        Some(i) => (&t[..i], &t[i + 1..]),
        None => return Err(bad()),
    };
    let coef = coef.trim_end_matches('*');
    let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
    let r = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('^').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
    };
    if !(c > 0.0) {
        return Err(bad());
    }
    Ok((c, r))
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        Self::from_pairs(&ConfigPairs::parse(text)?)
    }

    /// Resolve defaults and validate.
    pub fn from_pairs(pairs: &ConfigPairs) -> Result<Self> {
        let kind: ExperimentKind = pairs
            .0
            .get("kind")
            .ok_or_else(|| Error::Config("missing `kind`".into()))?
            .parse()?;
        let r: Option<f64> = pairs.get("r")?;
        let beta: Option<f64> = pairs.get("beta")?;
        let alpha: Option<f64> = pairs.get("alpha")?;
        let family_name: Option<String> = pairs.get("family")?;
        let family_name = family_name.unwrap_or_else(|| {
            match kind {
                ExperimentKind::CovarianceBound => "fbm",
                k if k.is_gaussian() => {
                    if alpha.is_some() {
                        "potential"
                    } else {
                        "fbm"
                    }
                }
                ExperimentKind::QuadraticVariation => "stable",
                _ => {
                    if beta.is_some() {
                        "stable"
                    } else {
                        "brownian-half"
                    }
                }
            }
            .to_string()
        });
        let family = match family_name.as_str() {
            "fbm" => {
                let r = r.unwrap_or(1.0);
                check_r(r)?;
                Family::Fbm { r }
            }
            "potential" => {
                let beta = beta.unwrap_or(2.0);
                check_beta(beta)?;
                let alpha = alpha.unwrap_or(1.0);
                if !(alpha > 0.0) {
                    return Err(Error::Config(format!("α = {alpha} must be positive")));
                }
                Family::Potential { beta, alpha }
            }
            "brownian-half" => Family::BrownianHalf,
            "stable" => {
                let beta = beta.unwrap_or(2.0);
                check_beta(beta)?;
                Family::Stable { beta }
            }
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        if kind.is_gaussian() && !matches!(family, Family::Fbm { .. } | Family::Potential { .. }) {
            return Err(Error::Config(format!("{kind} needs a Gaussian family (fbm or potential)")));
        }
        if kind.is_levy() && !matches!(family, Family::BrownianHalf | Family::Stable { .. }) {
            return Err(Error::Config(format!("{kind} needs a Lévy family (brownian-half or stable)")));
        }

        let levy = kind.is_levy();
        let p: f64 = pairs.get("p")?.unwrap_or(2.0);
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p = {p} must be ≥ 1")));
        }
        let (da, db) = if levy { (-2.0, 2.0) } else { (0.0, 1.0) };
        let a: f64 = pairs.get("a")?.unwrap_or(da);
        let b: f64 = pairs.get("b")?.unwrap_or(db);
        if !(b > a) {
            return Err(Error::Config(format!("window [{a}, {b}] is empty")));
        }
        let t: f64 = pairs.get("t")?.unwrap_or(1.0);
        if !(t > 0.0) {
            return Err(Error::Config(format!("time horizon t = {t} must be positive")));
        }
        let n: usize = pairs.get("n")?.unwrap_or(if levy { 1 << 20 } else { 1 << 12 });
        if n == 0 {
            return Err(Error::Config("n must be ≥ 1".into()));
        }
        let replicas: usize = pairs.get("replicas")?.unwrap_or(200);
        if replicas == 0 && kind != ExperimentKind::CovarianceBound {
            return Err(Error::Config("replicas R must be ≥ 1".into()));
        }
        let seed: u64 = pairs.get("seed")?.unwrap_or(0);
        let tolerance: f64 = pairs.get("tolerance")?.unwrap_or(match family {
            Family::Stable { beta } if beta < 2.0 => 0.15,
            _ => 0.10,
        });
        let std_ratio: f64 = pairs.get("std_ratio")?.unwrap_or(1.2);
        let m: Vec<u32> = pairs.list("m")?.unwrap_or_else(|| vec![1, 2]);
        let t_grid: Vec<f64> = pairs.list("t_grid")?.unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
        let qv_m: f64 = pairs.get("qv_m")?.unwrap_or(128.0);
        let concave: Vec<String> =
            pairs.list("concave")?.unwrap_or_else(|| vec!["h^0.5".into(), "h^0.8".into(), "2h".into()]);
        let convex_r: f64 = pairs.get("convex_r")?.unwrap_or(1.5);
        let quad_tol: f64 = pairs.get("quad_tol")?.unwrap_or(DEFAULT_TOL);

        // local-time bin width
        let beta_levy = family.beta().unwrap_or(2.0);
        let c = if family == Family::BrownianHalf { 0.5 } else { 1.0 };
        let step_scale = (c * t / n as f64).powf(1.0 / beta_levy);
        let epsilon: f64 = match pairs.get("epsilon")? {
            Some(e) => e,
            None if kind == ExperimentKind::QuadraticVariation => {
                // the cell width 1/m is the lag; resolve it as a lag is resolved elsewhere
                let cell = 1.0 / qv_m;
                cell / smallest_resolvable_lag(1.0, beta_levy, 0.05)
            }
            None => default_epsilon(step_scale),
        };
        if levy && !(epsilon > 0.0) {
            return Err(Error::Config(format!("ε = {epsilon} must be positive")));
        }

        let spacing = if levy { epsilon } else { (b - a) / n as f64 };
        let h_values: Option<Vec<f64>> = pairs.list("h")?;
        let h_steps: Option<Vec<u64>> = pairs.list("h_steps")?;
        let h = match (h_values, h_steps) {
            (Some(h), _) => h,
            (None, Some(steps)) => steps.iter().map(|k| *k as f64 * spacing).collect(),
            (None, None) => default_schedule(kind, family, spacing, beta_levy, qv_m),
        };

        let cfg = Self {
            kind,
            family,
            p,
            a,
            b,
            t,
            n,
            epsilon,
            h,
            replicas,
            seed,
            tolerance,
            std_ratio,
            m,
            t_grid,
            qv_m,
            concave,
            convex_r,
            quad_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.h.is_empty() {
            return Err(Error::Config("h schedule is empty".into()));
        }
        if self.h.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Config("every h must be positive".into()));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("h schedule must be strictly decreasing, got {:?}", self.h)));
        }
        match self.kind {
            k if k.is_gaussian() => {
                let dx = self.spacing();
                for &h in &self.h {
                    grid_steps(h, dx).map_err(|_| Error::Config(format!("h = {h} is not a multiple of Δ = {dx}")))?;
                }
            }
            ExperimentKind::QuadraticVariation => {
                if self.family.beta() != Some(2.0) {
                    return Err(Error::Config(
                        "quadratic variation has a finite limit only for β = 2 families".into(),
                    ));
                }
                if !(self.qv_m > 0.0) {
                    return Err(Error::Config("qv_m must be positive".into()));
                }
                grid_steps(1.0 / self.qv_m, self.epsilon)
                    .map_err(|_| Error::Config(format!("1/m = {} is not a multiple of ε = {}", 1.0 / self.qv_m, self.epsilon)))?;
            }
            ExperimentKind::LocaltimeConvergence | ExperimentKind::LmDecay => {
                for &h in &self.h {
                    let k = grid_steps(h, self.epsilon)
                        .map_err(|_| Error::Config(format!("h = {h} is not a multiple of ε = {}", self.epsilon)))?;
                    if k == 0 {
                        return Err(Error::Config(format!("h = {h} is smaller than ε")));
                    }
                }
                if self.kind == ExperimentKind::LmDecay {
                    if self.m.is_empty() || self.m.iter().any(|m| !(1..=2).contains(m)) {
                        return Err(Error::Config(format!("lm-decay moment orders must be 1 or 2, got {:?}", self.m)));
                    }
                    if self.t_grid.is_empty() {
                        return Err(Error::Config("t_grid is empty".into()));
                    }
                    let dt = self.t / self.n as f64;
                    for &s in &self.t_grid {
                        if s < 0.0 || s > self.t {
                            return Err(Error::Config(format!("t grid point {s} outside [0, {}]", self.t)));
                        }
                        if s > 0.0 {
                            grid_steps(s, dt).map_err(|_| {
                                Error::Config(format!("t grid point {s} is not a multiple of the time step {dt}"))
                            })?;
                        }
                    }
                }
            }
            ExperimentKind::CovarianceBound => {
                for s in &self.concave {
                    let (_, r) = parse_power_spec(s)?;
                    if !(r > 0.0 && r <= 1.0) {
                        return Err(Error::Config(format!("`{s}` is not concave (need 0 < r ≤ 1)")));
                    }
                }
                if !(self.convex_r > 1.0 && self.convex_r < 2.0) {
                    return Err(Error::Config(format!("convex_r = {} must lie in (1, 2)", self.convex_r)));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Grid spacing Δ (Gaussian) or bin width ε (Lévy).
    pub fn spacing(&self) -> f64 {
        if self.kind.is_levy() {
            self.epsilon
        } else {
            (self.b - self.a) / self.n as f64
        }
    }

    /// Resolved configuration as key/value pairs; parsing it back gives `self`.
    pub fn to_pairs(&self) -> ConfigPairs {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("kind", self.kind.to_string());
        put("family", self.family.name().to_string());
        match self.family {
            Family::Fbm { r } => put("r", r.to_string()),
            Family::Potential { beta, alpha } => {
                put("beta", beta.to_string());
                put("alpha", alpha.to_string());
            }
            Family::Stable { beta } => put("beta", beta.to_string()),
            Family::BrownianHalf => {}
        }
        put("p", self.p.to_string());
        put("a", self.a.to_string());
        put("b", self.b.to_string());
        put("t", self.t.to_string());
        put("n", self.n.to_string());
        put("epsilon", self.epsilon.to_string());
        put("h", join(&self.h));
        put("replicas", self.replicas.to_string());
        put("seed", self.seed.to_string());
        put("tolerance", self.tolerance.to_string());
        put("std_ratio", self.std_ratio.to_string());
        put("m", join(&self.m));
        put("t_grid", join(&self.t_grid));
        put("qv_m", self.qv_m.to_string());
        put("concave", self.concave.join(","));
        put("convex_r", self.convex_r.to_string());
        put("quad_tol", self.quad_tol.to_string());
        ConfigPairs(m)
    }

    /// Flat text form.
    pub fn to_text(&self) -> String {
        self.to_pairs().0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn default_schedule(kind: ExperimentKind, family: Family, spacing: f64, beta: f64, qv_m: f64) -> Vec<f64> {
    match kind {
        ExperimentKind::CovarianceBound => vec![1e-1, 1e-2, 1e-3, 1e-4],
        ExperimentKind::QuadraticVariation => vec![1.0 / qv_m],
        k if k.is_gaussian() => [16.0, 4.0, 1.0].iter().map(|k| k * spacing).collect(),
        _ => {
            let _ = family;
            let h_min = smallest_resolvable_lag(spacing, beta, 0.05);
            (0..4).rev().map(|k| h_min * 2f64.powi(k)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_defaults_and_round_trip() {
        let c = ExperimentConfig::parse_str("kind = gaussian-mean\nr = 0.5 # fbm\n\nreplicas = 2000\nseed = 7\n").unwrap();
        assert_eq!(c.family, Family::Fbm { r: 0.5 });
        assert_eq!(c.n, 4096);
        assert_eq!(c.h, vec![16.0 / 4096.0, 4.0 / 4096.0, 1.0 / 4096.0]);
        assert_eq!(ExperimentConfig::parse_str(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn levy_defaults() {
        let c = ExperimentConfig::parse_str("kind = localtime-convergence").unwrap();
        assert_eq!(c.family, Family::BrownianHalf);
        assert_eq!(c.epsilon, 2f64.powi(-8));
        assert_eq!(*c.h.last().unwrap(), 8.0 * c.epsilon);
        let s = ExperimentConfig::parse_str("kind = localtime-convergence\nbeta = 1.5").unwrap();
        assert_eq!(s.family, Family::Stable { beta: 1.5 });
        assert_eq!(*s.h.last().unwrap(), 128.0 * s.epsilon);
        assert_eq!(s.tolerance, 0.15);
        let q = ExperimentConfig::parse_str("kind = quadratic-variation").unwrap();
        assert_eq!(q.family, Family::Stable { beta: 2.0 });
        assert_eq!(q.h, vec![1.0 / 128.0]);
        assert_eq!(q.epsilon, 1.0 / 1024.0);
        assert_eq!(ExperimentConfig::parse_str(&q.to_text()).unwrap(), q);
    }

    #[test]
    fn rejections() {
        for bad in [
            "kind = gaussian-mean\nr = 2",
            "kind = gaussian-mean\nreplicas = 0",
            "kind = gaussian-mean\nh = 0.001,0.004",
            "kind = gaussian-mean\nh = 0.0001",
            "kind = gaussian-mean\nbogus = 1",
            "kind = nope",
            "r = 0.5",
            "kind = lm-decay\nm = 3",
            "kind = quadratic-variation\nbeta = 1.5",
            "kind = localtime-convergence\nbeta = 1.0",
            "kind = covariance-bound\nconcave = h^1.5",
            "kind = gaussian-mean\nfamily = stable",
            "kind = gaussian-mean\nline without equals",
        ] {
            assert!(matches!(ExperimentConfig::parse_str(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn power_specs() {
        assert_eq!(parse_power_spec("h^0.5").unwrap(), (1.0, 0.5));
        assert_eq!(parse_power_spec("2h").unwrap(), (2.0, 1.0));
        assert_eq!(parse_power_spec("3*h^0.8").unwrap(), (3.0, 0.8));
        assert!(parse_power_spec("x^2").is_err());
    }
}
