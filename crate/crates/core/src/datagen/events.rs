//! Classifier dataset: per-tick ΔL_Aeq vectors as the server would see them.

use rand::Rng;

use super::delivery::{delta_laeq, deliveries, random_schedules};
use super::io::{DatasetKind, DatasetMeta};
use super::scenario::{active_event, gen_event_scenario, EventScenario};
use super::split::{split_groups, Split};
use super::traces::simulate_node_traces;
use super::DatagenConfig;
use crate::acoustics::{PropagationConfig, Scene, NODES_PER_AREA};
use crate::dsp::SplMeterConfig;
use crate::error::{Error, Result};
use crate::neural::{Samples, Tensor2};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub tick_s: f64,
    /// Event index the tick belongs to (the event and the gap before it).
    pub group: u64,
    pub split: Split,
    pub view_dt_s: f64,
    pub delta: [f64; NODES_PER_AREA],
    pub label: bool,
}

#[derive(Debug, Clone)]
pub struct EventDataset {
    pub rows: Vec<EventRow>,
    pub meta: DatasetMeta,
}

/// Builds the event scenario, simulates the node meters and extracts one
/// labelled ΔL_Aeq vector per tick.
///
/// Training and validation ticks each draw one of the lossless views at
/// `cfg.view_dts`; test ticks use the `cfg.test_view_dt` view with packet
/// success rate `test_psr`.
pub fn gen_event_dataset(
    scene: &Scene,
    prop: &PropagationConfig,
    meter: &SplMeterConfig,
    cfg: &DatagenConfig,
    test_psr: f64,
    seed: u64,
) -> Result<(EventScenario, EventDataset)> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&test_psr) {
        return Err(Error::invalid("test packet success rate must lie in [0, 1]"));
    }
    let scenario = gen_event_scenario(scene, prop, cfg, seed)?;
    let traces = simulate_node_traces(scene, prop, meter, cfg.traffic_jitter_db, &scenario.events, scenario.duration_s, rng::derive(seed, 1))?;
    let horizon = scenario.duration_s;
    let n = NODES_PER_AREA;
    let mut views = Vec::new();
    for (v, &dt) in cfg.view_dts.iter().chain([&cfg.test_view_dt]).enumerate() {
        let mut r = rng::stream(rng::derive(seed, 2), v as u64);
        let sched = random_schedules(n, dt, &mut r);
        let psr = if v == cfg.view_dts.len() { test_psr } else { 1.0 };
        views.push((dt, deliveries(&traces, &sched, &vec![psr; n], horizon, rng::derive(seed, 3 + v as u64))?));
    }
    let ticks: Vec<f64> = (1..).map(|m| m as f64 * cfg.tick_s).take_while(|t| *t < horizon).collect();
    let groups: Vec<u64> =
        ticks.iter().map(|&t| scenario.events.partition_point(|e| e.stop_s <= t) as u64).collect();
    let (tags, _) = split_groups(&groups, cfg.test_fraction, cfg.validation_fraction, rng::derive(seed, 4))?;
    let mut pick = rng::stream(rng::derive(seed, 5), 0);
    let rows: Vec<EventRow> = ticks
        .iter()
        .zip(&groups)
        .zip(&tags)
        .map(|((&t, &group), &split)| {
            let v = if split == Split::Test { views.len() - 1 } else { pick.random_range(0..cfg.view_dts.len()) };
            let (dt, d) = &views[v];
            let delta = delta_laeq(d, t, None);
            EventRow {
                tick_s: t,
                group,
                split,
                view_dt_s: *dt,
                delta: delta.try_into().expect("one value per node"),
                label: active_event(&scenario.events, t).is_some(),
            }
        })
        .collect();
    let mut meta = DatasetMeta::new(DatasetKind::Event, seed, scene, cfg, prop, events_columns());
    meta.fill_counts(rows.iter().map(|r| (r.group, r.split)));
    meta.positive_rate = Some(rows.iter().filter(|r| r.label).count() as f64 / rows.len().max(1) as f64);
    meta.active_fraction = Some(scenario.active_fraction());
    meta.rejected_sources = Some(scenario.rejected);
    meta.test_view_psr = Some(test_psr);
    Ok((scenario, EventDataset { rows, meta }))
}

pub fn events_columns() -> Vec<String> {
    let mut c: Vec<String> = ["tick_s", "group", "split", "view_dt_s"].iter().map(|s| s.to_string()).collect();
    c.extend((0..NODES_PER_AREA).map(|i| format!("d{i}")));
    c.push("label".into());
    c
}

/// Classifier features and labels of one split.
pub fn event_samples(rows: &[EventRow], split: Split) -> Result<Samples> {
    let sel: Vec<&EventRow> = rows.iter().filter(|r| r.split == split).collect();
    if sel.is_empty() {
        return Ok(Samples { x: Tensor2::zeros(0, NODES_PER_AREA), y: Tensor2::zeros(0, 1) });
    }
    let x = Tensor2::from_vec(sel.len(), NODES_PER_AREA, sel.iter().flat_map(|r| r.delta).collect())?;
    let y = Tensor2::from_vec(sel.len(), 1, sel.iter().map(|r| f64::from(u8::from(r.label))).collect())?;
    Samples::new(x, y)
}
