//! Index selection rule: only opposite-index levels coalesce.

use serde::{Deserialize, Serialize};

use super::ep2::EpRecord;
use crate::scalar::Real;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub checked: usize,
    /// Records whose defined indices break the rule.
    pub violations: Vec<usize>,
    /// Records with an undefined index.
    pub undetermined: Vec<usize>,
}

impl SelectionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// EP2s must join opposite indices; EP3s must carry `(s, −s, s)` in energy order.
pub fn verify_selection_rule<T: Real>(records: &[EpRecord<T>]) -> SelectionReport {
    let mut report = SelectionReport::default();
    for (k, r) in records.iter().enumerate() {
        report.checked += 1;
        let Some(ix) = r.indices.iter().copied().collect::<Option<Vec<_>>>() else {
            report.undetermined.push(k);
            continue;
        };
        let ok = match (r.order, ix.as_slice()) {
            (2, [a, b]) => a != b,
            (3, [a, b, c]) => a == c && a != b,
            _ => false,
        };
        if !ok {
            report.violations.push(k);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_empty_report() {
        let r = verify_selection_rule::<f64>(&[]);
        assert_eq!(r, SelectionReport::default());
        assert!(r.holds());
    }
}
