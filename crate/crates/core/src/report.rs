//! Bound-inequality reports shared by the premise checker and the verifiers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Relative slack used when comparing the two sides of an inequality.
pub const BOUND_SLACK: f64 = 1e-9;

/// `lhs ≤ rhs + 1e-9·max(1, rhs)`.
pub fn bound_holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + BOUND_SLACK * rhs.max(1.0)
}

/// Outcome of checking an RIP premise on a concrete matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseStatus {
    /// Certified from exact constants or rigorous upper bounds.
    Holds,
    /// Violated even by lower bounds on the constants.
    Refuted,
    /// Lower bounds satisfy the premise but no upper bound certifies it.
    Inconclusive,
    /// An RIP order exceeds the number of columns.
    PremiseUndefined,
}

impl PremiseStatus {
    /// Combines the statuses of premises that must all hold.
    pub fn all(statuses: impl IntoIterator<Item = PremiseStatus>) -> PremiseStatus {
        let mut out = PremiseStatus::Holds;
        for s in statuses {
            out = match (out, s) {
                (PremiseStatus::PremiseUndefined, _) | (_, PremiseStatus::PremiseUndefined) => {
                    PremiseStatus::PremiseUndefined
                }
                (PremiseStatus::Refuted, _) | (_, PremiseStatus::Refuted) => PremiseStatus::Refuted,
                (PremiseStatus::Inconclusive, _) | (_, PremiseStatus::Inconclusive) => {
                    PremiseStatus::Inconclusive
                }
                _ => PremiseStatus::Holds,
            };
        }
        out
    }
}

/// Both sides of an evaluated inequality.
///
/// `holds` is always `lhs ≤ rhs + 1e-9·max(1, rhs)`; for conditional results
/// the status of the premise is carried separately so that a violated bound
/// is never confused with an unmet premise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub premise_status: Option<PremiseStatus>,
    pub context: BTreeMap<String, Value>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: bound_holds(lhs, rhs),
            premise_status: None,
            context: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.context.insert(
            key.to_owned(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn with_premise(mut self, status: PremiseStatus) -> Self {
        self.premise_status = Some(status);
        self
    }

    /// True when the premise is certified and the inequality failed.
    pub fn is_counterexample(&self) -> bool {
        !self.holds
            && self
                .premise_status
                .is_none_or(|s| s == PremiseStatus::Holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_rule() {
        assert!(bound_holds(1.0, 1.0));
        assert!(bound_holds(1.0 + 5e-10, 1.0));
        assert!(!bound_holds(1.0 + 2e-9, 1.0));
        assert!(bound_holds(100.0 + 5e-8, 100.0));
        assert!(!bound_holds(f64::NAN, 1.0));
    }

    #[test]
    fn combine_statuses() {
        use PremiseStatus::*;
        assert_eq!(PremiseStatus::all([Holds, Holds]), Holds);
        assert_eq!(PremiseStatus::all([Holds, Inconclusive]), Inconclusive);
        assert_eq!(PremiseStatus::all([Inconclusive, Refuted]), Refuted);
        assert_eq!(
            PremiseStatus::all([Refuted, PremiseUndefined]),
            PremiseUndefined
        );
    }

    #[test]
    fn json_shape() {
        let r = BoundReport::new("x", 1.0, 2.0)
            .with("k", 3)
            .with_premise(PremiseStatus::Inconclusive);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["premise_status"], "inconclusive");
        assert_eq!(v["context"]["k"], 3);
        assert_eq!(v["holds"], true);
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["name", "lhs", "rhs", "holds", "premise_status", "context"] {
            assert!(keys.contains(&k.to_owned()));
        }
    }
}
