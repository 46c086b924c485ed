use rand::Rng;
use serde::{Deserialize, Serialize};

use super::topology::CellTopology;
use crate::error::{Error, Result};
use crate::rng;

/// Periodic uplink schedule of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkSchedule {
    pub phase_s: f64,
    pub period_s: f64,
}

impl UplinkSchedule {
    pub fn times(&self, horizon_s: f64) -> impl Iterator<Item = f64> + '_ {
        let period = self.period_s;
        let phase = self.phase_s;
        (0u64..).map(move |k| phase + k as f64 * period).take_while(move |t| *t < horizon_s)
    }
}

impl CellTopology {
    pub fn schedules(&self) -> Vec<UplinkSchedule> {
        self.nodes.iter().map(|n| UplinkSchedule { phase_s: n.phase_s, period_s: n.period_s }).collect()
    }
}

/// Delivered uplink timestamps per node.
///
/// Packet `k` of node `i` is delivered when its uniform draw falls below
/// `psr[i]`. The draws depend only on `(seed, i, k)`, so a lower success
/// rate always delivers a subset of what a higher one delivers.
pub fn sample_loss_trace(schedules: &[UplinkSchedule], psr: &[f64], horizon_s: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if schedules.len() != psr.len() {
        return Err(Error::ShapeMismatch(format!("{} schedules vs {} success rates", schedules.len(), psr.len())));
    }
    if psr.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("success rates must lie in [0, 1]"));
    }
    if schedules.iter().any(|s| !(s.period_s > 0.0) || !s.phase_s.is_finite()) {
        return Err(Error::invalid("uplink periods must be positive"));
    }
    Ok(schedules
        .iter()
        .zip(psr)
        .enumerate()
        .map(|(i, (s, &p))| {
            let mut r = rng::stream(seed, i as u64);
            s.times(horizon_s).filter(|_| r.random::<f64>() < p).collect()
        })
        .collect())
}
