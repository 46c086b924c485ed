//! Free-field propagation with a flat building insertion loss.
//!
//! Per band: `L = P_band + D(theta, band) - 20 log10(r) - 11 - barrier`,
//! with bands summed energetically. No reflections, ground effect or air
//! absorption.

use serde::{Deserialize, Serialize};

use super::geometry::{distance, Point};
use super::scene::Scene;
use super::source::PointSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub barrier_loss_db: f64,
    pub min_range_m: f64,
    pub floor_db: f64,
    /// Spacing of the vehicle point sources along roads.
    pub road_spacing_m: f64,
    /// Recorded for provenance; the plan-view model ignores heights.
    pub source_height_m: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { barrier_loss_db: 10.0, min_range_m: 1.0, floor_db: 20.0, road_spacing_m: 10.0, source_height_m: 1.5 }
    }
}

/// Spherical spreading from a point source of power level `Lw`.
pub const SPREADING_CONSTANT_DB: f64 = 11.0;

/// Level at `receiver` in dB. Receivers inside a building read the floor.
pub fn propagate(src: &PointSource, scene: &Scene, receiver: Point, cfg: &PropagationConfig) -> f64 {
    if scene.inside_building(receiver) {
        return cfg.floor_db;
    }
    10.0 * received_energy(src, scene, receiver, cfg).log10()
}

/// Linear received energy, `10^(L/10)`, for a receiver outside buildings.
pub(crate) fn received_energy(src: &PointSource, scene: &Scene, receiver: Point, cfg: &PropagationConfig) -> f64 {
    let p = src.position();
    let r = distance(p, receiver).max(cfg.min_range_m);
    let bearing = (receiver[1] - p[1]).atan2(receiver[0] - p[0]);
    let mut loss_db = 20.0 * r.log10() + SPREADING_CONSTANT_DB;
    if scene.line_blocked(p, receiver) {
        loss_db += cfg.barrier_loss_db;
    }
    src.radiated_energy(bearing) * 10f64.powf(-loss_db / 10.0)
}

/// Vehicle point sources at the centres of `road_spacing_m` pieces along
/// every road polyline.
pub fn traffic_sources(scene: &Scene, cfg: &PropagationConfig) -> Vec<PointSource> {
    let spacing = cfg.road_spacing_m.max(1e-3);
    let mut out = Vec::new();
    for road in scene.roads() {
        let mut next = spacing / 2.0;
        let mut walked = 0.0;
        for w in road.points.windows(2) {
            let len = distance(w[0], w[1]);
            while next <= walked + len {
                let t = if len > 0.0 { (next - walked) / len } else { 0.0 };
                let x = w[0][0] + t * (w[1][0] - w[0][0]);
                let y = w[0][1] + t * (w[1][1] - w[0][1]);
                out.push(PointSource::omni(x, y, road.power_db));
                next += spacing;
            }
            walked += len;
        }
    }
    out
}
