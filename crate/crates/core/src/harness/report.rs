//! Experiment reports and their JSON/CSV persistence.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Summary statistics of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ensemble {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl Ensemble {
    /// Mean and sample standard deviation, summed in slice order.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN, stderr: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std, stderr: std / n.sqrt() }
    }
}

/// Where a row's target value comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub target_name: String,
    pub produced_by: String,
}

impl Provenance {
    pub fn new(target_name: impl Into<String>, produced_by: impl Into<String>) -> Self {
        Self { target_name: target_name.into(), produced_by: produced_by.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub statistic: String,
    pub h: f64,
    pub t: Option<f64>,
    pub ensemble_mean: f64,
    pub ensemble_std: f64,
    pub stderr: f64,
    pub target: Option<f64>,
    pub z_score: Option<f64>,
    /// `None` for rows that do not enter the verdict.
    pub pass: Option<bool>,
    pub provenance: Provenance,
}

impl ReportRow {
    pub fn new(statistic: impl Into<String>, h: f64, t: Option<f64>, e: Ensemble, target: Option<f64>, prov: Provenance) -> Self {
        let z_score = target.and_then(|tg| if e.stderr > 0.0 { Some((e.mean - tg) / e.stderr) } else { None });
        Self {
            statistic: statistic.into(),
            h,
            t,
            ensemble_mean: e.mean,
            ensemble_std: e.std,
            stderr: e.stderr,
            target,
            z_score,
            pass: None,
            provenance: prov,
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn ensemble(&self) -> Ensemble {
        Ensemble { mean: self.ensemble_mean, std: self.ensemble_std, stderr: self.stderr }
    }
}

/// A named pass/fail rule evaluated over several rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub kind: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub verdict: Outcome,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
    pub version: String,
}

impl ExperimentReport {
    /// Verdict: every designated row and every check passes.
    pub fn decide(rows: &[ReportRow], checks: &[Check]) -> Outcome {
        if rows.iter().all(|r| r.pass != Some(false)) && checks.iter().all(|c| c.pass) {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Outcome::Pass
    }

    pub fn rows_for<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// The rows alone, serialized; identical for identical config and seed.
    pub fn rows_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.rows)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One line per (statistic, h, t) cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kind,statistic,h,t,ensembleMean,ensembleStd,stderr,target,zScore,pass,targetName,producedBy")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.kind,
                r.statistic,
                r.h,
                opt(r.t),
                r.ensemble_mean,
                r.ensemble_std,
                r.stderr,
                opt(r.target),
                opt(r.z_score),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
                r.provenance.target_name,
                r.provenance.produced_by
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_statistics() {
        let e = Ensemble::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((e.stderr - e.std / 2.0).abs() < 1e-15);
        assert_eq!(Ensemble::of(&[3.0]).std, 0.0);
    }

    #[test]
    fn json_and_csv() {
        let row = ReportRow::new("x", 0.5, None, Ensemble::of(&[1.0, 3.0]), Some(2.0), Provenance::new("E|η|²", "abs_moment_normal"))
            .with_pass(true);
        assert_eq!(row.z_score, Some(0.0));
        let rep = ExperimentReport {
            kind: "gaussian-mean".into(),
            config: BTreeMap::new(),
            rows: vec![row],
            checks: vec![],
            verdict: Outcome::Pass,
            warnings: vec![],
            notes: vec![],
            runtime_seconds: 0.1,
            version: "0".into(),
        };
        let s = rep.to_json().unwrap();
        assert!(s.contains("\"ensembleMean\"") && s.contains("\"verdict\": \"pass\"") && s.contains("\"producedBy\""));
        assert_eq!(ExperimentReport::from_json(&s).unwrap(), rep);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("gaussian-mean,x,0.5,,2,"));
    }

    #[test]
    fn floats_survive_a_json_round_trip() {
        let xs: Vec<f64> = (1..200).map(|i| 1.0 / (i as f64 * 0.37 + 0.011).powf(1.7)).collect();
        let row = ReportRow::new("y", 0.000244140625, Some(0.25), Ensemble::of(&xs), Some(1.0), Provenance::new("one", "test"));
        let rep = ExperimentReport {
            kind: "gaussian-mean".into(),
            config: BTreeMap::new(),
            rows: vec![row],
            checks: vec![],
            verdict: Outcome::Pass,
            warnings: vec![],
            notes: vec![],
            runtime_seconds: 0.0,
            version: "0".into(),
        };
        let back = ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back.rows_json().unwrap(), rep.rows_json().unwrap());
    }
}
