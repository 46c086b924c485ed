//! Synthetic training data: the event scenario for the classifier and the
//! leave-one-out regression set for the source regressor.

pub mod delivery;
pub mod events;
pub mod io;
pub mod regression;
pub mod scenario;
pub mod split;
pub mod traces;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use delivery::{delta_laeq, deliveries, latest_two, random_schedules};
pub use events::{event_samples, gen_event_dataset, EventDataset, EventRow};
pub use io::{DatasetKind, DatasetMeta};
pub use regression::{gen_regression_set, regression_samples, RegressionDataset, RegressionRow};
pub use scenario::{active_event, gen_event_scenario, random_source, Event, EventScenario};
pub use split::{split_groups, DatasetSplit, Split};
pub use traces::{simulate_node_traces, source_at_nodes, traffic_at_nodes, NodeTraces};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatagenConfig {
    pub n_events: usize,
    pub event_min_s: f64,
    pub event_max_s: f64,
    pub gap_min_s: f64,
    pub gap_max_s: f64,
    pub level_min_db: f64,
    pub level_max_db: f64,
    /// Event maps whose raster mean stays below this are redrawn.
    pub reject_mean_db: f64,
    /// Scenario generation gives up after this many attempts per event.
    pub max_attempt_factor: usize,
    pub frame_interval_s: f64,
    pub n_trials: usize,
    /// Standard deviation of the Gaussian added to regression features.
    pub feature_noise_db: f64,
    /// Frame-to-frame traffic fluctuation at each node.
    pub traffic_jitter_db: f64,
    pub test_fraction: f64,
    pub validation_fraction: f64,
    pub tick_s: f64,
    /// Uplink periods mixed into the classifier's training views.
    pub view_dts: Vec<f64>,
    /// Uplink period of the classifier's test view.
    pub test_view_dt: f64,
    /// Gateway distance whose loss rate applies to the test view.
    pub test_view_dgw: f64,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        Self {
            n_events: 500,
            event_min_s: 300.0,
            event_max_s: 1200.0,
            gap_min_s: 60.0,
            gap_max_s: 1800.0,
            level_min_db: 70.0,
            level_max_db: 110.0,
            reject_mean_db: 35.0,
            max_attempt_factor: 10,
            frame_interval_s: 15.0,
            n_trials: 10_000,
            feature_noise_db: 1.0,
            traffic_jitter_db: 1.0,
            test_fraction: 0.2,
            validation_fraction: 0.2,
            tick_s: 60.0,
            view_dts: vec![300.0],
            test_view_dt: 300.0,
            test_view_dgw: 500.0,
        }
    }
}

impl DatagenConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = |a: f64, b: f64| a.is_finite() && b.is_finite() && a <= b;
        if !ordered(self.event_min_s, self.event_max_s)
            || !ordered(self.gap_min_s, self.gap_max_s)
            || !ordered(self.level_min_db, self.level_max_db)
            || self.event_min_s <= 0.0
            || self.gap_min_s <= 0.0
        {
            return Err(Error::invalid("datagen ranges must be finite, positive and ordered"));
        }
        if !(self.frame_interval_s > 0.0) || !(self.tick_s > 0.0) || self.max_attempt_factor == 0 {
            return Err(Error::invalid("frame interval, tick and attempt factor must be positive"));
        }
        if self.view_dts.is_empty() || self.view_dts.iter().chain([&self.test_view_dt]).any(|d| !(*d > 0.0)) {
            return Err(Error::invalid("view periods must be positive"));
        }
        if !(self.feature_noise_db >= 0.0) || !(self.traffic_jitter_db >= 0.0) {
            return Err(Error::invalid("noise levels must be non-negative"));
        }
        Ok(())
    }
}
