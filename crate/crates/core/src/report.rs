//! Check records shared by every verification entry point.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// passes when `residual <= tolerance`
    AtMost,
    /// passes when `residual >= tolerance`
    AtLeast,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    #[serde(default)]
    pub degenerate: bool,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn at_most(&mut self, id: &str, anchor: &str, residual: f64, tolerance: f64) -> &mut Check {
        self.push(id, anchor, residual, tolerance, Bound::AtMost)
    }

    pub fn at_least(&mut self, id: &str, anchor: &str, residual: f64, tolerance: f64) -> &mut Check {
        self.push(id, anchor, residual, tolerance, Bound::AtLeast)
    }

    /// Boolean outcome stored as residual 0 (true) or 1 (false).
    pub fn flag(&mut self, id: &str, anchor: &str, ok: bool) -> &mut Check {
        self.push(id, anchor, if ok { 0.0 } else { 1.0 }, 0.5, Bound::AtMost)
    }

    fn push(&mut self, id: &str, anchor: &str, residual: f64, tolerance: f64, bound: Bound) -> &mut Check {
        let passed = residual.is_finite()
            && match bound {
                Bound::AtMost => residual <= tolerance,
                Bound::AtLeast => residual >= tolerance,
            };
        self.checks.push(Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            residual,
            tolerance,
            bound,
            passed,
            note: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.degenerate |= other.degenerate;
        self.checks.extend(other.checks);
    }

    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

impl Check {
    pub fn with_note(&mut self, note: impl Into<String>) -> &mut Self {
        self.note = Some(note.into());
        self
    }
}
