use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DatagenConfig;
use crate::acoustics::{render_map, traffic_sources, NoiseRaster, PointSource, PropagationConfig, Scene};
use crate::error::{Error, Result};
use crate::rng;

/// A non-traffic source active over `[start_s, stop_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub start_s: f64,
    pub stop_s: f64,
    pub source: PointSource,
}

impl Event {
    pub fn active_at(&self, t: f64) -> bool {
        self.start_s <= t && t < self.stop_s
    }
}

/// Index of the event active at `t`, if any. Events must be sorted and
/// non-overlapping.
pub fn active_event(events: &[Event], t: f64) -> Option<usize> {
    let k = events.partition_point(|e| e.start_s <= t);
    (k > 0 && events[k - 1].active_at(t)).then(|| k - 1)
}

#[derive(Debug, Clone)]
pub struct EventScenario {
    pub duration_s: f64,
    pub events: Vec<Event>,
    pub traffic: NoiseRaster,
    /// Candidate sources rejected by the mean-level rule.
    pub rejected: usize,
}

impl EventScenario {
    /// Total event time over the duration.
    pub fn active_fraction(&self) -> f64 {
        self.events.iter().map(|e| e.stop_s - e.start_s).sum::<f64>() / self.duration_s
    }
}

/// Random directional source anywhere in the area.
pub fn random_source<R: Rng + ?Sized>(scene: &Scene, level_db: f64, rng: &mut R) -> PointSource {
    let e = scene.extent();
    let x = rng.random_range(0.0..e);
    let y = rng.random_range(0.0..e);
    PointSource::random(x, y, level_db, rng)
}

/// Draws a source whose own rendered map reaches `reject_mean_db`, retrying
/// at most `budget` times in total across calls.
#[allow(clippy::too_many_arguments)]
fn accepted_source(
    scene: &Scene,
    prop: &PropagationConfig,
    cfg: &DatagenConfig,
    r: &mut rng::Rng,
    attempts: &mut usize,
    budget: usize,
    rejected: &mut usize,
    accepted: usize,
) -> Result<PointSource> {
    loop {
        if *attempts >= budget {
            return Err(Error::RejectionExhausted { attempts: *attempts, accepted });
        }
        *attempts += 1;
        let level = r.random_range(cfg.level_min_db..=cfg.level_max_db);
        let s = random_source(scene, level, r);
        if render_map(std::slice::from_ref(&s), scene, prop).mean_db() >= cfg.reject_mean_db {
            return Ok(s);
        }
        *rejected += 1;
    }
}

/// Alternating gaps and events, one event at a time.
pub fn gen_event_scenario(scene: &Scene, prop: &PropagationConfig, cfg: &DatagenConfig, seed: u64) -> Result<EventScenario> {
    cfg.validate()?;
    let traffic = render_map(&traffic_sources(scene, prop), scene, prop);
    let mut r = rng::stream(seed, 0x5CE0);
    let budget = cfg.max_attempt_factor * cfg.n_events.max(1);
    let (mut attempts, mut rejected) = (0, 0);
    let mut events = Vec::with_capacity(cfg.n_events);
    let mut t = 0.0;
    for k in 0..cfg.n_events {
        t += snap(r.random_range(cfg.gap_min_s..=cfg.gap_max_s), cfg.frame_interval_s);
        let len = snap(r.random_range(cfg.event_min_s..=cfg.event_max_s), cfg.frame_interval_s);
        let source = accepted_source(scene, prop, cfg, &mut r, &mut attempts, budget, &mut rejected, k)?;
        events.push(Event { start_s: t, stop_s: t + len, source });
        t += len;
    }
    t += snap(r.random_range(cfg.gap_min_s..=cfg.gap_max_s), cfg.frame_interval_s);
    Ok(EventScenario { duration_s: t, events, traffic, rejected })
}

fn snap(v: f64, step: f64) -> f64 {
    ((v / step).round() * step).max(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DatagenConfig {
        DatagenConfig { n_events: 12, ..Default::default() }
    }

    #[test]
    fn events_are_ordered_and_disjoint() {
        let scene = Scene::default_urban();
        let s = gen_event_scenario(&scene, &PropagationConfig::default(), &small(), 3).unwrap();
        assert_eq!(s.events.len(), 12);
        for w in s.events.windows(2) {
            assert!(w[0].stop_s + 60.0 <= w[1].start_s + 1e-9);
        }
        for e in &s.events {
            let len = e.stop_s - e.start_s;
            assert!((300.0..=1200.0).contains(&len));
        }
        assert!(s.events.last().unwrap().stop_s < s.duration_s);
        let mid = (s.events[3].start_s + s.events[3].stop_s) / 2.0;
        assert_eq!(active_event(&s.events, mid), Some(3));
        assert_eq!(active_event(&s.events, s.events[3].stop_s), None);
        assert_eq!(active_event(&s.events, 0.0), None);
    }

    #[test]
    fn quiet_sources_never_enter() {
        let scene = Scene::default_urban();
        let cfg = DatagenConfig { level_min_db: 0.0, level_max_db: 1.0, ..small() };
        let err = gen_event_scenario(&scene, &PropagationConfig::default(), &cfg, 1).unwrap_err();
        assert!(matches!(err, Error::RejectionExhausted { attempts: 120, accepted: 0 }));
    }

    #[test]
    fn zero_events_is_traffic_only() {
        let scene = Scene::default_urban();
        let cfg = DatagenConfig { n_events: 0, ..Default::default() };
        let s = gen_event_scenario(&scene, &PropagationConfig::default(), &cfg, 1).unwrap();
        assert!(s.events.is_empty());
        assert_eq!(s.active_fraction(), 0.0);
    }
}
