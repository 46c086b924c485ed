//! Runtime map loop and the replay evaluation harness.

pub mod replay;
pub mod state;
pub mod summary;
pub mod tick;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use replay::{replay, replay_fold, write_summary_csv, write_tick_csv, ErrorReport, EvaluationRun, FieldScenario, TickError};
pub use state::NodeLatest;
pub use summary::{correction_summary, read_summary_csv, CorrectionCell, CorrectionGrid};
pub use tick::{MapContext, Models, Pipeline, SourcePrediction, TickOutput, MIN_REPORTING_NODES};

/// Field-test protocol and scoring knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplayConfig {
    /// Traffic-only time before the first test.
    pub lead_in_s: f64,
    pub tests: usize,
    pub unscored_tests: usize,
    pub on_s: f64,
    pub off_s: f64,
    pub source_level_db: f64,
    /// Placements whose own map stays below this mean are redrawn.
    pub min_map_mean_db: f64,
    pub tick_s: f64,
    pub threshold: f64,
    pub trials: usize,
    /// Monte-Carlo draws for the per-cell packet success rate.
    pub psr_trials: usize,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            lead_in_s: 900.0,
            tests: 6,
            unscored_tests: 1,
            on_s: 900.0,
            off_s: 900.0,
            source_level_db: 100.0,
            min_map_mean_db: 35.0,
            tick_s: 60.0,
            threshold: 0.5,
            trials: 25,
            psr_trials: 2000,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tests == 0 || self.unscored_tests >= self.tests {
            return Err(Error::invalid("replay needs at least one scored test"));
        }
        if !(self.on_s > 0.0 && self.off_s >= 0.0 && self.lead_in_s >= 0.0 && self.tick_s > 0.0) {
            return Err(Error::invalid("replay durations must be positive"));
        }
        if !(0.0..=1.0).contains(&self.threshold) || self.trials == 0 || self.psr_trials == 0 {
            return Err(Error::invalid("replay needs a threshold in [0, 1] and positive trial counts"));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.lead_in_s + self.tests as f64 * (self.on_s + self.off_s)
    }
}
