//! Golden oracle values keyed by query descriptor.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub value: f64,
    /// Relative tolerance the value was produced at.
    pub tol: f64,
    #[serde(rename = "producedBy")]
    pub produced_by: String,
}

/// JSON map from descriptor to [`Fixture`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixtures(pub BTreeMap<String, Fixture>);

impl Fixtures {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    pub fn get(&self, descriptor: &str) -> Option<&Fixture> {
        self.0.get(descriptor)
    }

    pub fn record(&mut self, descriptor: impl Into<String>, value: f64, tol: f64, produced_by: impl Into<String>) {
        self.0.insert(descriptor.into(), Fixture { value, tol, produced_by: produced_by.into() });
    }

    /// Whether `value` agrees with the stored entry within its tolerance;
    /// `None` when the descriptor is unknown.
    pub fn matches(&self, descriptor: &str, value: f64) -> Option<bool> {
        self.get(descriptor).map(|f| (value - f.value).abs() <= f.tol * f.value.abs().max(f64::MIN_POSITIVE))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut f = Fixtures::default();
        f.record("a", 0.5, 1e-9, "dirichlet_moment");
        let s = f.to_json_string().unwrap();
        assert!(s.contains("\"producedBy\": \"dirichlet_moment\""));
        let g = Fixtures::from_json_str(&s).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.matches("a", 0.5 + 1e-12), Some(true));
        assert_eq!(g.matches("a", 0.51), Some(false));
        assert_eq!(g.matches("b", 0.5), None);
    }
}
