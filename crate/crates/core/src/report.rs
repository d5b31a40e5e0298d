//! Verification records shared by the suites and the command line front-end.

use serde::Serialize;

pub use crate::gfunction::Witness;

/// One verified property. `pass` means the observed verdict matches the expected one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub holds: bool,
    pub expected: bool,
    pub pass: bool,
    /// Worst margin in scale-free units, `(ln value - ln bound) / |ln eps|` or the
    /// natural analogue for the check.
    pub worst_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(id: impl Into<String>, holds: bool, expected: bool) -> Self {
        Check {
            id: id.into(),
            holds,
            expected,
            pass: holds == expected,
            worst_margin: None,
            witness: None,
            note: None,
        }
    }

    /// A property expected to hold.
    pub fn holds(id: impl Into<String>, holds: bool) -> Self {
        Self::new(id, holds, true)
    }

    pub fn margin(mut self, m: f64) -> Self {
        self.worst_margin = Some(m);
        self
    }

    pub fn witness(mut self, w: Option<Witness>) -> Self {
        self.witness = w;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

/// Named list of checks; `overall` is the conjunction of their `pass` flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>) -> Self {
        let overall = checks.iter().all(|c| c.pass);
        VerificationReport {
            suite: suite.into(),
            checks,
            overall,
        }
    }

    /// Concatenates the checks of several reports under a new suite name.
    pub fn merge(
        suite: impl Into<String>,
        parts: impl IntoIterator<Item = VerificationReport>,
    ) -> Self {
        Self::new(suite, parts.into_iter().flat_map(|r| r.checks).collect())
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}
