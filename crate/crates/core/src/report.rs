//! Gated comparisons between a Monte Carlo quantity and a bound.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

/// One checked inequality or identity.
///
/// `pass` allows `sigmas` standard errors of slack; a record is a hard
/// failure once the violation exceeds `sigmas + 1` standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub pass: bool,
    pub relation: Relation,
    pub sigmas: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Record {
    pub fn new(name: impl Into<String>, relation: Relation, lhs: f64, rhs: f64, se: f64, sigmas: f64) -> Self {
        let mut r = Self { name: name.into(), lhs, rhs, se, pass: false, relation, sigmas, note: None };
        r.pass = r.violation() <= sigmas * se;
        r
    }

    /// lhs ≤ rhs up to 3 standard errors.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, se: f64) -> Self {
        Self::new(name, Relation::Le, lhs, rhs, se, 3.0)
    }

    /// lhs ≥ rhs up to 3 standard errors.
    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64, se: f64) -> Self {
        Self::new(name, Relation::Ge, lhs, rhs, se, 3.0)
    }

    /// |lhs − rhs| ≤ sigmas·se.
    pub fn eq(name: impl Into<String>, lhs: f64, rhs: f64, se: f64, sigmas: f64) -> Self {
        Self::new(name, Relation::Eq, lhs, rhs, se, sigmas)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Amount by which the relation is violated (≤ 0 when it holds exactly).
    pub fn violation(&self) -> f64 {
        let v = match self.relation {
            Relation::Le => self.lhs - self.rhs,
            Relation::Ge => self.rhs - self.lhs,
            Relation::Eq => (self.lhs - self.rhs).abs(),
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    pub fn hard_failure(&self) -> bool {
        self.violation() > (self.sigmas + 1.0) * self.se
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates() {
        assert!(Record::le("a", 1.0, 1.0, 0.0).pass);
        assert!(Record::le("a", 1.2, 1.0, 0.1).pass);
        assert!(!Record::le("a", 1.35, 1.0, 0.1).pass);
        assert!(!Record::le("a", 1.35, 1.0, 0.1).hard_failure());
        assert!(Record::le("a", 1.45, 1.0, 0.1).hard_failure());
        assert!(Record::ge("a", -0.2, 0.0, 0.1).pass);
        assert!(!Record::eq("a", 0.5, 0.0, 0.1, 4.0).pass);
        assert!(!Record::le("a", f64::NAN, 0.0, 1.0).pass);
    }

    #[test]
    fn json_keys() {
        let v = serde_json::to_value(Record::le("x", 1.0, 2.0, 0.1)).unwrap();
        for k in ["name", "lhs", "rhs", "se", "pass"] {
            assert!(v.get(k).is_some());
        }
        assert_eq!(v["relation"], "<=");
    }
}
