//! One map update: ΔL_Aeq classifier, then the source regressor when the
//! classifier fires.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::state::NodeLatest;
use crate::acoustics::{combine, render_cell, render_map, NoiseRaster, PointSource, PropagationConfig, Scene, NODES_PER_AREA};
use crate::dsp::{KfParams, SplSample};
use crate::error::{Error, Result};
use crate::neural::{EventClassifier, SourceRegressor};

/// Nodes that must have delivered at least once for a normal-mode tick.
pub const MIN_REPORTING_NODES: usize = 2;

/// Trained models plus a memo of classifier outputs. ΔL_Aeq values of
/// quantized samples are whole decibels, so the memo hits often.
#[derive(Debug)]
pub struct Models {
    pub classifier: EventClassifier,
    pub regressor: SourceRegressor,
    memo: Mutex<HashMap<[i16; NODES_PER_AREA], f64>>,
}

impl Models {
    pub fn new(classifier: EventClassifier, regressor: SourceRegressor) -> Result<Self> {
        classifier.validate()?;
        regressor.validate()?;
        Ok(Self { classifier, regressor, memo: Mutex::new(HashMap::new()) })
    }

    pub fn event_probability(&self, delta: &[f64]) -> Result<f64> {
        let key: Option<[i16; NODES_PER_AREA]> = delta
            .iter()
            .map(|d| (d.fract() == 0.0 && d.abs() < 1000.0).then_some(*d as i16))
            .collect::<Option<Vec<_>>>()
            .and_then(|v| v.try_into().ok());
        let Some(key) = key else {
            return self.classifier.predict_event(delta);
        };
        if let Some(p) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*p);
        }
        let p = self.classifier.predict_event(delta)?;
        self.memo.lock().expect("memo lock").insert(key, p);
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePrediction {
    pub p: f64,
    pub x: f64,
    pub y: f64,
    pub level: f64,
    pub tick_s: f64,
}

impl SourcePrediction {
    pub fn source(&self) -> PointSource {
        PointSource::omni(self.x, self.y, self.level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickOutput {
    pub t: f64,
    pub p_event: f64,
    pub prediction: Option<SourcePrediction>,
    /// Fewer than [`MIN_REPORTING_NODES`] nodes have ever delivered. No
    /// source is predicted in this state.
    pub degraded: bool,
}

/// Per-area runtime state: the latest deliveries of all nine nodes and an
/// optional held-out node whose data never reaches the models.
#[derive(Debug, Clone)]
pub struct Pipeline<'m> {
    models: &'m Models,
    nodes: Vec<NodeLatest>,
    held_out: Option<usize>,
    kf: KfParams,
    threshold: f64,
}

impl<'m> Pipeline<'m> {
    pub fn new(models: &'m Models, kf: KfParams, threshold: f64, held_out: Option<usize>) -> Result<Self> {
        kf.validate()?;
        if held_out.is_some_and(|h| h >= NODES_PER_AREA) {
            return Err(Error::invalid("held-out node index out of range"));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::invalid("event threshold must lie in [0, 1]"));
        }
        Ok(Self { models, nodes: vec![NodeLatest::default(); NODES_PER_AREA], held_out, kf, threshold })
    }

    pub fn nodes(&self) -> &[NodeLatest] {
        &self.nodes
    }

    /// Takes one delivered sample. The held-out node's samples are dropped.
    pub fn ingest(&mut self, s: &SplSample) -> Result<()> {
        let n = usize::from(s.node_id);
        if n >= NODES_PER_AREA {
            return Err(Error::invalid(format!("unknown node {n}")));
        }
        if self.held_out == Some(n) {
            return Ok(());
        }
        self.nodes[n].ingest(*s, self.kf)
    }

    /// Map update at time `t` from whatever has been ingested. Callers must
    /// not ingest samples newer than `t` before calling.
    pub fn tick(&mut self, t: f64) -> Result<TickOutput> {
        if self.nodes.iter().any(|n| n.delivered_at().is_some_and(|d| d > t)) {
            return Err(Error::invalid(format!("a delivered sample is newer than tick {t} s")));
        }
        let reporting = self.nodes.iter().filter(|n| n.latest.is_some()).count();
        let degraded = reporting < MIN_REPORTING_NODES;
        let delta: Vec<f64> = self.nodes.iter().map(NodeLatest::delta_laeq).collect();
        let p_event = self.models.event_probability(&delta)?;
        let mut prediction = None;
        if p_event >= self.threshold && !degraded {
            let fg: Vec<f64> = self.nodes.iter().map(NodeLatest::fused_foreground).collect();
            let mask: Vec<bool> = (0..NODES_PER_AREA).map(|i| Some(i) != self.held_out).collect();
            let est = self.models.regressor.predict_source(&fg, &mask)?;
            prediction = Some(SourcePrediction { p: p_event, x: est.x, y: est.y, level: est.level, tick_s: t });
        }
        Ok(TickOutput { t, p_event, prediction, degraded })
    }
}

/// The traffic map and everything needed to draw predictions on top of it.
#[derive(Debug, Clone)]
pub struct MapContext<'s> {
    pub scene: &'s Scene,
    pub prop: PropagationConfig,
    pub traffic: NoiseRaster,
}

impl<'s> MapContext<'s> {
    pub fn new(scene: &'s Scene, prop: PropagationConfig) -> Self {
        let traffic = render_map(&crate::acoustics::traffic_sources(scene, &prop), scene, &prop);
        Self { scene, prop, traffic }
    }

    /// Output raster: traffic alone, or combined with the predicted source.
    pub fn render(&self, out: &TickOutput) -> Result<NoiseRaster> {
        match &out.prediction {
            None => Ok(self.traffic.clone()),
            Some(p) => combine(&[&self.traffic, &render_map(&[p.source()], self.scene, &self.prop)]),
        }
    }

    /// The output raster's value at `pos` without rendering the whole map.
    pub fn level_at(&self, out: &TickOutput, pos: [f64; 2]) -> Result<f64> {
        let (r, c) = self.traffic.cell_of(pos)?;
        let base = self.traffic.get(r, c);
        match &out.prediction {
            None => Ok(base),
            Some(p) => {
                let s = render_cell(&[p.source()], self.scene, &self.prop, r, c);
                Ok(10.0 * (10f64.powf(base / 10.0) + 10f64.powf(s / 10.0)).log10())
            }
        }
    }
}
