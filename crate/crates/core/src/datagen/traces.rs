//! Per-node sound level traces: true levels from the propagation engine,
//! measured through the software meter on synthetic audio frames.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::scenario::{active_event, Event};
use crate::acoustics::{propagate, traffic_sources, PointSource, PropagationConfig, Scene};
use crate::dsp::{SplMeter, SplMeterConfig};
use crate::error::{Error, Result};
use crate::rng;

/// Per node, per frame: true level and the meter's `(L_AF, L_Aeq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTraces {
    pub frame_interval_s: f64,
    pub truth: Vec<Vec<f64>>,
    pub laf: Vec<Vec<f64>>,
    pub laeq: Vec<Vec<f64>>,
}

impl NodeTraces {
    pub fn frames(&self) -> usize {
        self.truth.first().map_or(0, Vec::len)
    }

    /// Index of the latest frame captured at or before `t`.
    pub fn frame_at(&self, t: f64) -> Option<usize> {
        if t < 0.0 || self.frames() == 0 {
            return None;
        }
        Some(((t / self.frame_interval_s + 1e-9).floor() as usize).min(self.frames() - 1))
    }
}

pub fn energy_db(e: f64) -> f64 {
    10.0 * e.log10()
}

pub fn db_energy(l: f64) -> f64 {
    10f64.powf(l / 10.0)
}

/// Steady traffic level at every node.
pub fn traffic_at_nodes(scene: &Scene, prop: &PropagationConfig) -> Vec<f64> {
    let sources = traffic_sources(scene, prop);
    scene.nodes().iter().map(|n| levels_sum(&sources, scene, *n, prop)).collect()
}

fn levels_sum(sources: &[PointSource], scene: &Scene, at: [f64; 2], prop: &PropagationConfig) -> f64 {
    energy_db(sources.iter().map(|s| db_energy(propagate(s, scene, at, prop))).sum())
}

/// Level of `source` alone at every node.
pub fn source_at_nodes(source: &PointSource, scene: &Scene, prop: &PropagationConfig) -> Vec<f64> {
    scene.nodes().iter().map(|n| propagate(source, scene, *n, prop)).collect()
}

/// Audio synthesis for the software meter.
pub struct FrameSynth {
    meter_cfg: SplMeterConfig,
    /// Amplitude scale that makes the meter read the requested level.
    gain: f64,
}

impl FrameSynth {
    /// Calibrates the synthesis against the meter's own reading of white
    /// noise, so the meter error is zero-mean.
    pub fn new(meter_cfg: &SplMeterConfig) -> Result<Self> {
        let meter = SplMeter::new(meter_cfg.clone())?;
        let chain_gain = meter.chain().white_noise_power_gain(meter_cfg.sample_rate).sqrt();
        let mut synth = Self { meter_cfg: meter_cfg.clone(), gain: 1.0 / chain_gain };
        let reference = 80.0;
        let mut probe = SplMeter::new(meter_cfg.clone())?;
        let mut r = rng::stream(0xCA1B, 0);
        let mut e = 0.0;
        let n = 256;
        for _ in 0..n {
            let frame = synth.frame(reference, &mut r);
            e += db_energy(probe.process_frame(&frame)?.0);
        }
        let bias = energy_db(e / n as f64) - reference;
        synth.gain *= 10f64.powf(-bias / 20.0);
        Ok(synth)
    }

    pub fn frame<R: Rng + ?Sized>(&self, level_db: f64, r: &mut R) -> Vec<f64> {
        let a = self.meter_cfg.rms_for_level(level_db) * self.gain;
        (0..self.meter_cfg.frame_len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(r);
                a * z
            })
            .collect()
    }
}

/// Simulates every node's meter over `[0, duration_s)` for a sequence of
/// non-overlapping events on top of jittered traffic.
pub fn simulate_node_traces(
    scene: &Scene,
    prop: &PropagationConfig,
    meter_cfg: &SplMeterConfig,
    traffic_jitter_db: f64,
    events: &[Event],
    duration_s: f64,
    seed: u64,
) -> Result<NodeTraces> {
    if !(duration_s > 0.0) {
        return Err(Error::invalid("trace duration must be positive"));
    }
    let jitter = Normal::new(0.0, traffic_jitter_db.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
    let synth = FrameSynth::new(meter_cfg)?;
    let traffic = traffic_at_nodes(scene, prop);
    let event_levels: Vec<Vec<f64>> = events.iter().map(|e| source_at_nodes(&e.source, scene, prop)).collect();
    let dt = meter_cfg.frame_interval_s;
    let frames = (duration_s / dt).ceil() as usize;
    let nodes = traffic.len();
    let mut out = NodeTraces {
        frame_interval_s: dt,
        truth: vec![Vec::with_capacity(frames); nodes],
        laf: vec![Vec::with_capacity(frames); nodes],
        laeq: vec![Vec::with_capacity(frames); nodes],
    };
    for n in 0..nodes {
        let mut meter = SplMeter::new(meter_cfg.clone())?;
        let mut r = rng::stream(seed, n as u64);
        for k in 0..frames {
            let t = k as f64 * dt;
            let mut e = db_energy(traffic[n] + jitter.sample(&mut r));
            if let Some(i) = active_event(events, t) {
                e += db_energy(event_levels[i][n]);
            }
            let level = energy_db(e);
            let (laf, laeq) = meter.process_frame(&synth.frame(level, &mut r))?;
            out.truth[n].push(level);
            out.laf[n].push(laf);
            out.laeq[n].push(laeq);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meter_tracks_truth() {
        let scene = Scene::default_urban();
        let prop = PropagationConfig::default();
        let tr = simulate_node_traces(&scene, &prop, &SplMeterConfig::default(), 1.0, &[], 1800.0, 4).unwrap();
        assert_eq!(tr.frames(), 120);
        for n in 0..9 {
            let err: Vec<f64> = tr.truth[n].iter().zip(&tr.laf[n]).map(|(a, b)| b - a).collect();
            let mean = err.iter().sum::<f64>() / err.len() as f64;
            assert!(mean.abs() < 0.3, "node {n}: {mean}");
            assert!(err.iter().all(|e| e.abs() < 2.0));
        }
        assert_eq!(tr.frame_at(29.9), Some(1));
        assert_eq!(tr.frame_at(1e9), Some(119));
        assert_eq!(tr.frame_at(-1.0), None);
    }

    #[test]
    fn event_raises_levels_and_laeq_lags() {
        let scene = Scene::default_urban();
        let prop = PropagationConfig::default();
        let n0 = scene.nodes()[0];
        let ev = Event { start_s: 900.0, stop_s: 1800.0, source: PointSource::omni(n0[0] + 5.0, n0[1], 100.0) };
        let tr = simulate_node_traces(&scene, &prop, &SplMeterConfig::default(), 0.0, &[ev], 2700.0, 2).unwrap();
        let on = 60;
        assert!(tr.laf[0][on] > tr.laf[0][on - 1] + 10.0);
        assert!(tr.laeq[0][on] < tr.laf[0][on]);
        assert!(tr.laeq[0][on + 30] > tr.laeq[0][on + 1]);
        assert!(tr.laf[0][121] < tr.laf[0][119] - 10.0);
    }
}
