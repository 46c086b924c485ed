use serde::{Deserialize, Serialize};

use super::models::{EventClassifier, SourceRegressor};
use super::train::Samples;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub samples: usize,
    pub accuracy: f64,
    /// 0 when nothing is predicted positive.
    pub precision: f64,
    /// 0 when there are no positives.
    pub recall: f64,
}

/// Confusion-matrix metrics at `threshold`.
pub fn classifier_metrics(model: &EventClassifier, data: &Samples, threshold: f64) -> Result<ClassifierMetrics> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation samples"));
    }
    let p = model.predict_batch(&data.x)?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (p, y) in p.iter().zip(data.y.data()) {
        match (*p >= threshold, *y >= 0.5) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(ClassifierMetrics {
        samples: p.len(),
        accuracy: ratio(tp + tn, p.len()),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorMetrics {
    pub samples: usize,
    pub mae_x: f64,
    pub mae_y: f64,
    /// `sqrt(mae_x^2 + mae_y^2)`.
    pub mae_loc: f64,
    pub mae_level: f64,
}

pub fn regressor_metrics(model: &SourceRegressor, data: &Samples) -> Result<RegressorMetrics> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation samples"));
    }
    let est = model.predict_batch(&data.x)?;
    let (mut ex, mut ey, mut el) = (0.0, 0.0, 0.0);
    for (r, e) in est.iter().enumerate() {
        let y = data.y.row(r);
        ex += (e.x - y[0]).abs();
        ey += (e.y - y[1]).abs();
        el += (e.level - y[2]).abs();
    }
    let n = est.len() as f64;
    let (mae_x, mae_y) = (ex / n, ey / n);
    Ok(RegressorMetrics { samples: est.len(), mae_x, mae_y, mae_loc: mae_x.hypot(mae_y), mae_level: el / n })
}
