use serde::{Deserialize, Serialize};

use super::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub cfg: AdamConfig,
    pub learning_rate: f64,
    pub step: u64,
    m: Vec<Tensor2>,
    v: Vec<Tensor2>,
}

impl AdamState {
    pub fn new(params: &[&Tensor2], learning_rate: f64, cfg: AdamConfig) -> Self {
        let zeros = || params.iter().map(|p| Tensor2::zeros(p.rows(), p.cols())).collect();
        Self { cfg, learning_rate, step: 0, m: zeros(), v: zeros() }
    }

    pub fn update(&mut self, params: Vec<&mut Tensor2>, grads: &[Tensor2]) {
        self.step += 1;
        let AdamConfig { beta1, beta2, epsilon } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        let lr = self.learning_rate;
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((w, g), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut()).zip(v.data_mut()) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + epsilon);
            }
        }
    }
}
