//! Check reports shared by every verification routine.

use serde::{Deserialize, Serialize};

/// Measured outcome of a single check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckValue {
    Residual(f64),
    Integer(i64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Short label of the property the check certifies.
    pub anchor: String,
    pub value: CheckValue,
    pub passed: bool,
    /// Informational records never fail the report.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a residual that passes when it does not exceed `tol`.
    pub fn residual(&mut self, name: impl Into<String>, anchor: &str, value: f64, tol: f64) {
        let passed = value.is_finite() && value <= tol;
        self.push(name, anchor, CheckValue::Residual(value), passed);
    }

    pub fn flag(&mut self, name: impl Into<String>, anchor: &str, ok: bool) {
        self.push(name, anchor, CheckValue::Flag(ok), ok);
    }

    pub fn integer(&mut self, name: impl Into<String>, anchor: &str, value: i64, passed: bool) {
        self.push(name, anchor, CheckValue::Integer(value), passed);
    }

    pub fn push(&mut self, name: impl Into<String>, anchor: &str, value: CheckValue, passed: bool) {
        self.checks.push(CheckRecord {
            name: name.into(),
            anchor: anchor.to_string(),
            value,
            passed,
            informational: false,
            note: None,
        });
    }

    pub fn info(&mut self, name: impl Into<String>, anchor: &str, value: CheckValue, note: &str) {
        self.checks.push(CheckRecord {
            name: name.into(),
            anchor: anchor.to_string(),
            value,
            passed: true,
            informational: true,
            note: Some(note.to_string()),
        });
    }

    /// Attaches a note to the most recent record.
    pub fn annotate(&mut self, note: impl Into<String>) {
        if let Some(last) = self.checks.last_mut() {
            last.note = Some(note.into());
        }
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match &c.note {
                Some(n) => format!("{} ({n})", c.name),
                None => c.name.clone(),
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual among records whose name starts with `prefix`.
    pub fn max_residual(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .filter_map(|c| match c.value {
                CheckValue::Residual(r) => Some(r),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}
