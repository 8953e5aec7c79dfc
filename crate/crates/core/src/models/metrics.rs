use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion matrix (rows = true class, columns = predicted) with derived metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label_names: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<u64>,
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_confusion(confusion: Vec<Vec<u64>>, label_names: Vec<String>) -> Result<Self> {
        let n = confusion.len();
        if n == 0 || confusion.iter().any(|r| r.len() != n) || label_names.len() != n {
            return Err(Error::Shape("confusion matrix must be square and labelled".into()));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        let support: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
        let predicted: Vec<u64> = (0..n).map(|c| confusion.iter().map(|r| r[c]).sum()).collect();
        let precision: Vec<f64> = (0..n).map(|c| ratio(confusion[c][c], predicted[c])).collect();
        let recall: Vec<f64> = (0..n).map(|c| ratio(confusion[c][c], support[c])).collect();
        let f1 = precision
            .iter()
            .zip(&recall)
            .map(|(&p, &r)| if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
            .collect();
        let trace: u64 = (0..n).map(|c| confusion[c][c]).sum();
        let report = Self {
            label_names,
            confusion,
            precision,
            recall,
            f1,
            support,
            accuracy: ratio(trace, total),
        };
        report.assert_consistent();
        Ok(report)
    }

    pub fn from_predictions(
        truth: &[usize],
        predicted: &[usize],
        label_names: Vec<String>,
    ) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if truth.len() != predicted.len() {
            return Err(Error::Shape("prediction count differs from label count".into()));
        }
        let n = label_names.len();
        let mut confusion = vec![vec![0u64; n]; n];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n || p >= n {
                return Err(Error::Label(format!("class index {} out of range", t.max(p))));
            }
            confusion[t][p] += 1;
        }
        Self::from_confusion(confusion, label_names)
    }

    pub fn n_classes(&self) -> usize {
        self.confusion.len()
    }

    pub fn total(&self) -> u64 {
        self.support.iter().sum()
    }

    fn assert_consistent(&self) {
        for (row, &s) in self.confusion.iter().zip(&self.support) {
            assert_eq!(row.iter().sum::<u64>(), s, "confusion row sum differs from support");
        }
        let trace: u64 = (0..self.n_classes()).map(|c| self.confusion[c][c]).sum();
        assert_eq!(self.accuracy, ratio(trace, self.total()), "accuracy differs from trace/total");
    }
}
