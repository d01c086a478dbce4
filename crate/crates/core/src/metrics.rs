//! Binary classification metrics with class 1 as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::fractional_ranks;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub auc: f64,
    #[serde(flatten)]
    pub confusion: Confusion,
}

/// Accuracy, F1 (zero when precision + recall is zero), and the confusion
/// counts.
pub fn accuracy_f1(pred: &[u8], truth: &[u8]) -> Result<(f64, f64, Confusion)> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut c = Confusion::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == 1, t == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let accuracy = (c.tp + c.tn) as f64 / c.total() as f64;
    let precision = if c.tp + c.fp == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fp) as f64 };
    let recall = if c.tp + c.fn_ == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fn_) as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok((accuracy, f1, c))
}

/// Mann–Whitney area under the ROC curve; tied scores count one half.
pub fn auc(scores: &[f64], truth: &[u8]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: truth.len() });
    }
    let pos = truth.iter().filter(|&&t| t == 1).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let ranks = fractional_ranks(ndarray::ArrayView1::from(scores));
    let rank_sum: f64 = ranks.iter().zip(truth).filter(|(_, &t)| t == 1).map(|(r, _)| r).sum();
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn evaluate(pred: &[u8], scores: &[f64], truth: &[u8]) -> Result<MetricsReport> {
    let (accuracy, f1, confusion) = accuracy_f1(pred, truth)?;
    Ok(MetricsReport { accuracy, f1, auc: auc(scores, truth)?, confusion })
}
