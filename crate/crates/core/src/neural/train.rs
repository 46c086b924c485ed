use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::models::Network;
use super::tensor::Tensor2;
use crate::error::{Error, Result};
use crate::rng;

/// Raw features and targets, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Tensor2,
    pub y: Tensor2,
}

impl Samples {
    pub fn new(x: Tensor2, y: Tensor2) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::ShapeMismatch(format!("{} feature rows vs {} target rows", x.rows(), y.rows())));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self { x: self.x.select_rows(idx), y: self.y.select_rows(idx) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Overrides the model's own learning rate.
    pub learning_rate: Option<f64>,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { batch_size: 32, max_epochs: 200, patience: 10, learning_rate: None, adam: AdamConfig::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training batch loss per epoch (dropout active).
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
}

/// Loss over `data` without dropout, evaluated in chunks.
pub fn evaluate<N: Network>(model: &N, data: &Samples) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let chunk = 512;
    let mut total = 0.0;
    let idx: Vec<usize> = (0..data.len()).collect();
    for part in idx.chunks(chunk) {
        let s = data.subset(part);
        total += model.loss_grad(&s.x, &s.y, None, None)? * part.len() as f64;
    }
    Ok(total / data.len() as f64)
}

/// Mini-batch Adam with early stopping on validation loss. The model ends
/// up holding the best-validation weights.
pub fn train<N: Network>(model: &mut N, train: &Samples, val: &Samples, cfg: &TrainConfig, seed: u64) -> Result<TrainReport> {
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if cfg.batch_size == 0 || cfg.max_epochs == 0 {
        return Err(Error::invalid("batch size and epoch count must be positive"));
    }
    let lr = cfg.learning_rate.unwrap_or(model.learning_rate());
    let mut adam = AdamState::new(&model.params(), lr, cfg.adam);
    let mut report = TrainReport::default();
    let mut best = (f64::INFINITY, model.clone());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stale = 0;
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng::stream(seed, 2 * epoch as u64));
        let mut drop_rng = rng::stream(seed, 2 * epoch as u64 + 1);
        let mut sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let b = train.subset(batch);
            let mut grads = model.zero_grads();
            sum += model.loss_grad(&b.x, &b.y, Some(&mut drop_rng), Some(&mut grads))? * batch.len() as f64;
            if grads.iter().any(|g| !g.all_finite()) {
                return Err(Error::NonFinite("gradient"));
            }
            adam.update(model.params_mut(), &grads);
        }
        report.train_loss.push(sum / train.len() as f64);
        let v = if val.is_empty() { report.train_loss[epoch] } else { evaluate(model, val)? };
        report.val_loss.push(v);
        if v < best.0 {
            best = (v, model.clone());
            report.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    *model = best.1;
    Ok(report)
}
