use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Where the worst margin occurred. `x` and `k` are present when the
/// check resolves space or the entropy level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
}

impl Location {
    pub fn at(t: f64) -> Self {
        Self { t, x: None, k: None }
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }
}

/// Outcome of one inequality check. `worst_violation` is the smallest
/// margin seen (negative when the inequality is broken somewhere).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub location: Location,
    pub tolerance: f64,
    /// Measured auxiliary quantities (fitted constants, mass rates, ...).
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.get(key).copied()
    }
}

/// Accumulates margins and keeps the smallest.
#[derive(Clone, Debug)]
pub struct MarginTracker {
    name: String,
    tolerance: f64,
    worst: f64,
    location: Location,
    details: BTreeMap<String, f64>,
}

impl MarginTracker {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            worst: f64::INFINITY,
            location: Location::default(),
            details: BTreeMap::new(),
        }
    }

    /// NaN margins count as −∞.
    pub fn record(&mut self, margin: f64, at: Location) {
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if m < self.worst {
            self.worst = m;
            self.location = at;
        }
    }

    pub fn detail(&mut self, key: &str, value: f64) {
        self.details.insert(key.to_string(), value);
    }

    pub fn finish(self) -> InequalityReport {
        // nothing recorded: vacuously satisfied
        let worst = if self.worst == f64::INFINITY { 0.0 } else { self.worst };
        InequalityReport {
            name: self.name,
            passed: worst >= -self.tolerance,
            worst_violation: worst,
            location: self.location,
            tolerance: self.tolerance,
            details: self.details,
        }
    }
}
