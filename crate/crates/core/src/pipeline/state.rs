//! Server-side view of each node: what has arrived so far and nothing newer.

use crate::dsp::{foreground, KfParams, ScalarKfState, SplSample};
use crate::error::{Error, Result};

/// Map update cadence; the fusion filter's process noise is per tick.
pub const TICK_S: f64 = 60.0;

/// Latest deliveries and derived levels for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLatest {
    pub latest: Option<SplSample>,
    pub previous: Option<SplSample>,
    /// Minimum L_AF and L_Aeq delivered so far; `+inf` before the first packet.
    pub background_laf: f64,
    pub background_laeq: f64,
    pub kf: Option<ScalarKfState>,
}

impl Default for NodeLatest {
    fn default() -> Self {
        Self { latest: None, previous: None, background_laf: f64::INFINITY, background_laeq: f64::INFINITY, kf: None }
    }
}

impl NodeLatest {
    pub fn delivered_at(&self) -> Option<f64> {
        self.latest.map(|s| s.t)
    }

    /// Takes one delivered sample. Samples must arrive in time order. The
    /// filter drifts by one process-noise step per [`TICK_S`] since the
    /// previous packet, so sparse uplinks get a larger gain.
    pub fn ingest(&mut self, s: SplSample, kf: KfParams) -> Result<()> {
        if !(s.laf.is_finite() && s.laeq.is_finite()) {
            return Err(Error::NonFinite("delivered sample"));
        }
        if self.delivered_at().is_some_and(|t| s.t < t) {
            return Err(Error::invalid(format!("sample at {} s arrived after one at {} s", s.t, self.delivered_at().unwrap_or(0.0))));
        }
        self.background_laf = self.background_laf.min(s.laf);
        self.background_laeq = self.background_laeq.min(s.laeq);
        let fg_laf = foreground(s.laf, self.background_laf);
        let fg_laeq = foreground(s.laeq, self.background_laeq);
        let elapsed = self.delivered_at().map_or(0.0, |t| s.t - t);
        match &mut self.kf {
            Some(state) => {
                state.fuse_after(elapsed / TICK_S, fg_laf, fg_laeq);
            }
            None => self.kf = Some(ScalarKfState::new(fg_laeq, kf)?),
        }
        self.previous = self.latest.replace(s);
        Ok(())
    }

    /// Change between the two latest delivered L_Aeq values, 0 with fewer
    /// than two packets.
    pub fn delta_laeq(&self) -> f64 {
        match (self.latest, self.previous) {
            (Some(a), Some(b)) => a.laeq - b.laeq,
            _ => 0.0,
        }
    }

    /// KF-fused foreground level, 0 before the first packet.
    pub fn fused_foreground(&self) -> f64 {
        self.kf.map_or(0.0, |k| k.estimate.max(0.0))
    }
}
