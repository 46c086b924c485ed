use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise parameters for fusing foreground L_AF and L_Aeq, dB².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KfParams {
    pub q_process: f64,
    pub r_laf: f64,
    pub r_laeq: f64,
}

impl Default for KfParams {
    fn default() -> Self {
        Self { q_process: 0.5, r_laf: 9.0, r_laeq: 1.0 }
    }
}

impl KfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_process > 0.0 && self.r_laf > 0.0 && self.r_laeq > 0.0) {
            return Err(Error::invalid("Kalman noise variances must be positive"));
        }
        if self.r_laf <= self.r_laeq {
            return Err(Error::invalid("r_laf must exceed r_laeq"));
        }
        Ok(())
    }
}

/// Scalar random-walk Kalman filter over a node's foreground level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarKfState {
    pub estimate: f64,
    pub variance: f64,
    pub params: KfParams,
}

impl ScalarKfState {
    /// Starts at the first observation with the L_AF variance.
    pub fn new(first_observation: f64, params: KfParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { estimate: first_observation, variance: params.r_laf, params })
    }

    /// Predict, then update with L_AF and L_Aeq in turn. Returns the fused level.
    pub fn fuse(&mut self, laf_fg: f64, laeq_fg: f64) -> f64 {
        self.fuse_after(1.0, laf_fg, laeq_fg)
    }

    /// As [`Self::fuse`] after `steps` random-walk steps without data.
    pub fn fuse_after(&mut self, steps: f64, laf_fg: f64, laeq_fg: f64) -> f64 {
        self.variance += self.params.q_process * steps.max(0.0);
        self.update(laf_fg, self.params.r_laf);
        self.update(laeq_fg, self.params.r_laeq);
        self.estimate
    }

    fn update(&mut self, z: f64, r: f64) {
        let k = self.variance / (self.variance + r);
        self.estimate += k * (z - self.estimate);
        self.variance *= 1.0 - k;
    }
}

/// Functional form of [`ScalarKfState::fuse`].
pub fn kf_fuse(laf_fg: f64, laeq_fg: f64, state: ScalarKfState) -> (f64, ScalarKfState) {
    let mut next = state;
    let fused = next.fuse(laf_fg, laeq_fg);
    (fused, next)
}

/// Measured level above the location's background, never negative.
pub fn foreground(measured: f64, background: f64) -> f64 {
    (measured - background).max(0.0)
}
