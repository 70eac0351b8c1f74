//! Confusion-matrix accounting with the minority class as "positive".
//!
//! Both scores are products of rates under a square root:
//!
//! - G-mean    = sqrt( TP/(TP+FN) · TN/(TN+FP) )  (sensitivity × specificity)
//! - F-measure = sqrt( TP/(TP+FN) · TP/(TP+FP) )  (recall × precision)
//!
//! A factor with a zero denominator makes the whole score 0.

use serde::{Deserialize, Serialize};

use crate::{Error, Label, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.tn + self.fp
    }

    pub fn g_mean(&self) -> f64 {
        g_mean(self)
    }

    pub fn f_measure(&self) -> f64 {
        f_measure(self)
    }
}

/// Tallies `(prediction, truth)` pairs; `positive` is the minority label.
pub fn confusion(preds: &[Label], truth: &[Label], positive: Label) -> Result<ConfusionMatrix> {
    if preds.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} ground-truth labels",
            preds.len(),
            truth.len()
        )));
    }
    if let Some(l) = preds.iter().chain(truth).find(|&&l| l > 1) {
        return Err(Error::invalid(format!("label {l} is not binary")));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in preds.iter().zip(truth) {
        match (p == positive, t == positive) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
        }
    }
    Ok(cm)
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn g_mean(cm: &ConfusionMatrix) -> f64 {
    (rate(cm.tp, cm.tp + cm.fn_) * rate(cm.tn, cm.tn + cm.fp)).sqrt()
}

pub fn f_measure(cm: &ConfusionMatrix) -> f64 {
    (rate(cm.tp, cm.tp + cm.fn_) * rate(cm.tp, cm.tp + cm.fp)).sqrt()
}
