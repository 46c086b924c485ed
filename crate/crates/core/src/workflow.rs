//! End-to-end steps shared by the command line and the test suites.

use crate::acoustics::Scene;
use crate::config::RunConfig;
use crate::datagen::{event_samples, regression_samples, EventRow, RegressionRow, Split};
use crate::error::{Error, Result};
use crate::lorawan::{channel_sweep, CellPsr};
use crate::neural::{train, EventClassifier, SourceRegressor, TrainReport};
use crate::pipeline::{replay, ErrorReport, EvaluationRun, FieldScenario, MapContext, Models};
use crate::rng;

/// Per-cell packet success rates for a scene's node layout.
pub fn cell_rates(scene: &Scene, cfg: &RunConfig, d_gws: &[f64], dts: &[f64], seed: u64) -> Result<Vec<CellPsr>> {
    channel_sweep(&scene.node_offsets(), d_gws, dts, cfg.replay.psr_trials, seed, &cfg.channel)
}

/// `r_s_cell` at one grid point.
pub fn cell_rate(scene: &Scene, cfg: &RunConfig, d_gw: f64, dt: f64, seed: u64) -> Result<f64> {
    Ok(cell_rates(scene, cfg, &[d_gw], &[dt], seed)?[0].r_s_cell)
}

pub fn train_classifier(rows: &[EventRow], cfg: &RunConfig, seed: u64) -> Result<(EventClassifier, TrainReport)> {
    let tr = event_samples(rows, Split::Train)?;
    let va = event_samples(rows, Split::Validation)?;
    let mut m = EventClassifier::new(rng::derive(seed, 0xC1A5));
    m.pos_weight = cfg.neural.pos_weight;
    let rep = train(&mut m, &tr, &va, &cfg.neural.classifier, rng::derive(seed, 0x7EA1))?;
    Ok((m, rep))
}

pub fn train_regressor(rows: &[RegressionRow], cfg: &RunConfig, seed: u64) -> Result<(SourceRegressor, TrainReport)> {
    let tr = regression_samples(rows, Split::Train)?;
    let va = regression_samples(rows, Split::Validation)?;
    let mut m = SourceRegressor::new(rng::derive(seed, 0x2E62));
    let rep = train(&mut m, &tr, &va, &cfg.neural.regressor, rng::derive(seed, 0x7EA2))?;
    Ok((m, rep))
}

/// Replays every `(d_gw, dt)` pair of the grid on one simulated field test.
/// `on_cell` sees each report as soon as it is ready.
#[allow(clippy::too_many_arguments)]
pub fn replay_grid(
    scene: &Scene,
    models: &Models,
    cfg: &RunConfig,
    d_gws: &[f64],
    dts: &[f64],
    trials: usize,
    seed: u64,
    mut on_cell: impl FnMut(&ErrorReport) -> Result<()>,
) -> Result<Vec<ErrorReport>> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let scenario = FieldScenario::simulate(scene, &cfg.propagation, &cfg.meter, cfg.datagen.traffic_jitter_db, &cfg.replay, seed)?;
    let ctx = MapContext::new(scene, cfg.propagation);
    let rates = cell_rates(scene, cfg, d_gws, dts, rng::derive(seed, 0xCE11))?;
    let mut out = Vec::with_capacity(rates.len());
    for c in rates {
        let run = EvaluationRun { d_gw: c.d_gw, dt_s: c.dt_s, psr: c.r_s_cell, trials, seed };
        let report = replay(&scenario, &ctx, models, cfg.kf, &run, None)?;
        on_cell(&report)?;
        out.push(report);
    }
    Ok(out)
}
