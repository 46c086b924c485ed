//! Synthetic field-test replay and map-error scoring.
//!
//! Protocol: a traffic-only lead-in, then `tests` source placements of
//! `on_s` seconds each followed by `off_s` of silence. The first
//! `unscored_tests` are replayed but not scored. Every tick compares the
//! held-out node's measured 1-minute level with the output map at its
//! position.
//!
//! Trials share their random numbers across grid cells: node phases are
//! fractions of the uplink period and packet losses use coupled uniforms,
//! so a lower success rate drops a superset of the packets.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tick::{MapContext, Models, Pipeline, TickOutput};
use super::ReplayConfig;
use crate::acoustics::{render_map, PropagationConfig, Scene, NODES_PER_AREA};
use crate::datagen::traces::{db_energy, energy_db};
use crate::datagen::{deliveries, random_source, simulate_node_traces, Event, NodeTraces};
use crate::dsp::{KfParams, SplMeterConfig, SplSample};
use crate::error::{Error, Result};
use crate::lorawan::UplinkSchedule;
use crate::rng;

const PHASE_STREAM: u64 = 0xF4A5;
const LOSS_STREAM: u64 = 0x1055;
const TRACE_STREAM: u64 = 0x7ACE;
const PLACEMENT_STREAM: u64 = 0x9A1C;

/// The replayed scenario: source placements and simulated node meters.
#[derive(Debug, Clone)]
pub struct FieldScenario {
    pub tests: Vec<Event>,
    pub duration_s: f64,
    pub traces: NodeTraces,
    pub ticks: Vec<f64>,
    /// Energy-mean L_AF over the minute ending at each tick, [node][tick].
    pub minute_levels: Vec<Vec<f64>>,
    pub cfg: ReplayConfig,
}

impl FieldScenario {
    pub fn simulate(
        scene: &Scene,
        prop: &PropagationConfig,
        meter: &SplMeterConfig,
        traffic_jitter_db: f64,
        cfg: &ReplayConfig,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut r = rng::stream(seed, PLACEMENT_STREAM);
        let mut tests = Vec::with_capacity(cfg.tests);
        let mut attempts = 0;
        while tests.len() < cfg.tests {
            attempts += 1;
            if attempts > 1000 * cfg.tests {
                return Err(Error::RejectionExhausted { attempts, accepted: tests.len() });
            }
            let source = random_source(scene, cfg.source_level_db, &mut r);
            // Operators stand outdoors; the placement must also show on the map.
            if scene.inside_building(source.position())
                || render_map(std::slice::from_ref(&source), scene, prop).mean_db() < cfg.min_map_mean_db
            {
                continue;
            }
            let start_s = cfg.lead_in_s + tests.len() as f64 * (cfg.on_s + cfg.off_s);
            tests.push(Event { start_s, stop_s: start_s + cfg.on_s, source });
        }
        let duration_s = cfg.duration_s();
        let traces = simulate_node_traces(scene, prop, meter, traffic_jitter_db, &tests, duration_s, rng::derive(seed, TRACE_STREAM))?;
        let ticks: Vec<f64> = (1..).map(|k| k as f64 * cfg.tick_s).take_while(|t| *t <= duration_s).collect();
        let minute_levels = (0..traces.laf.len())
            .map(|n| ticks.iter().map(|&t| window_level(&traces, n, t - cfg.tick_s, t)).collect())
            .collect();
        Ok(Self { tests, duration_s, traces, ticks, minute_levels, cfg: cfg.clone() })
    }

    /// Index of the scored test whose on-window contains tick `t`.
    pub fn scored_test_at(&self, t: f64) -> Option<usize> {
        self.tests.iter().enumerate().skip(self.cfg.unscored_tests).find(|(_, e)| t > e.start_s && t <= e.stop_s).map(|(i, _)| i)
    }

    /// Index of the test (on plus off window) containing tick `t`.
    pub fn test_block_at(&self, t: f64) -> Option<usize> {
        self.tests.iter().position(|e| t > e.start_s && t <= e.start_s + self.cfg.on_s + self.cfg.off_s)
    }

    /// Max minus min of the node's 1-minute levels over each test block.
    pub fn prior_errors(&self, node: usize) -> Vec<f64> {
        (0..self.tests.len())
            .map(|k| {
                let (lo, hi) = self
                    .ticks
                    .iter()
                    .zip(&self.minute_levels[node])
                    .filter(|(t, _)| self.test_block_at(**t) == Some(k))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, l)| (lo.min(*l), hi.max(*l)));
                if hi >= lo {
                    hi - lo
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Energy mean of the node's L_AF frames in `(from, to]`.
fn window_level(traces: &NodeTraces, node: usize, from: f64, to: f64) -> f64 {
    let dt = traces.frame_interval_s;
    let (mut e, mut k) = (0.0, 0usize);
    for (i, l) in traces.laf[node].iter().enumerate() {
        let t = i as f64 * dt;
        if t > from && t <= to {
            e += db_energy(*l);
            k += 1;
        }
    }
    if k == 0 {
        traces.laf[node][0]
    } else {
        energy_db(e / k as f64)
    }
}

/// One grid cell of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub d_gw: f64,
    pub dt_s: f64,
    /// Per-cell packet success rate applied to every node.
    pub psr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl EvaluationRun {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || !(0.0..=1.0).contains(&self.psr) || self.trials == 0 {
            return Err(Error::invalid("evaluation run needs dt > 0, psr in [0, 1] and at least one trial"));
        }
        Ok(())
    }

    /// Uplink schedules of `trial`: phases uniform in `[0, dt)`.
    pub fn schedules(&self, trial: usize) -> Vec<UplinkSchedule> {
        let mut r = rng::stream(rng::derive(self.seed, PHASE_STREAM), trial as u64);
        (0..NODES_PER_AREA).map(|_| UplinkSchedule { phase_s: r.random::<f64>() * self.dt_s, period_s: self.dt_s }).collect()
    }

    pub fn deliveries(&self, scenario: &FieldScenario, trial: usize) -> Result<Vec<Vec<SplSample>>> {
        let seed = rng::derive(rng::derive(self.seed, LOSS_STREAM), trial as u64);
        deliveries(&scenario.traces, &self.schedules(trial), &[self.psr; NODES_PER_AREA], scenario.duration_s, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickError {
    pub t: f64,
    /// Scored test whose on-window holds this tick.
    pub test: Option<usize>,
    pub prior: f64,
    pub post: f64,
    /// Post error of the traffic-only map.
    pub baseline: f64,
    /// Fraction of trials and folds with a source prediction.
    pub detect_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub d_gw: f64,
    pub dt_s: f64,
    pub psr: f64,
    pub trials: usize,
    pub folds: usize,
    pub ticks: Vec<TickError>,
    pub mean_prior: f64,
    pub mean_post: f64,
    pub mean_baseline: f64,
    /// `1 - mean_post / mean_prior` over scored ticks.
    pub correction: f64,
    pub baseline_correction: f64,
    /// Mean post error of system and baseline over unscored, event-free ticks.
    pub quiet_post: f64,
    pub quiet_baseline: f64,
}

/// Observer for per-tick outputs of one (trial, fold) pass.
pub type TickHook<'a> = &'a mut dyn FnMut(usize, usize, &TickOutput) -> Result<()>;

/// Runs one (trial, fold) pass and returns the post error per tick.
pub fn replay_fold(
    scenario: &FieldScenario,
    ctx: &MapContext<'_>,
    models: &Models,
    kf: KfParams,
    delivered: &[Vec<SplSample>],
    fold: usize,
    mut on_tick: impl FnMut(&TickOutput),
) -> Result<Vec<f64>> {
    let mut p = Pipeline::new(models, kf, scenario.cfg.threshold, Some(fold))?;
    let mut next = vec![0usize; delivered.len()];
    let pos = ctx.scene.nodes()[fold];
    let mut post = Vec::with_capacity(scenario.ticks.len());
    for (k, &t) in scenario.ticks.iter().enumerate() {
        for (n, d) in delivered.iter().enumerate() {
            while next[n] < d.len() && d[next[n]].t <= t {
                p.ingest(&d[next[n]])?;
                next[n] += 1;
            }
        }
        let out = p.tick(t)?;
        on_tick(&out);
        post.push((scenario.minute_levels[fold][k] - ctx.level_at(&out, pos)?).abs());
    }
    Ok(post)
}

/// Scores one grid cell over all trials and leave-one-out folds.
pub fn replay(
    scenario: &FieldScenario,
    ctx: &MapContext<'_>,
    models: &Models,
    kf: KfParams,
    run: &EvaluationRun,
    hook: Option<TickHook<'_>>,
) -> Result<ErrorReport> {
    run.validate()?;
    let n_ticks = scenario.ticks.len();
    let folds = NODES_PER_AREA;
    let mut post = vec![0.0; n_ticks];
    let mut detect = vec![0.0; n_ticks];
    let mut hook = hook;
    for trial in 0..run.trials {
        let delivered = run.deliveries(scenario, trial)?;
        for fold in 0..folds {
            let mut k = 0;
            let mut err = None;
            let e = replay_fold(scenario, ctx, models, kf, &delivered, fold, |out| {
                if out.prediction.is_some() {
                    detect[k] += 1.0;
                }
                k += 1;
                if let Some(h) = hook.as_mut() {
                    if let Err(e) = h(trial, fold, out) {
                        err.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            for (acc, v) in post.iter_mut().zip(e) {
                *acc += v;
            }
        }
    }
    let passes = (run.trials * folds) as f64;
    // Prior and baseline do not depend on the trial.
    let mut prior = vec![0.0; n_ticks];
    let mut baseline = vec![0.0; n_ticks];
    let quiet = TickOutput { t: 0.0, p_event: 0.0, prediction: None, degraded: false };
    for fold in 0..folds {
        let pe = scenario.prior_errors(fold);
        let base = ctx.level_at(&quiet, ctx.scene.nodes()[fold])?;
        for (k, &t) in scenario.ticks.iter().enumerate() {
            prior[k] += scenario.test_block_at(t).map_or(0.0, |i| pe[i]);
            baseline[k] += (scenario.minute_levels[fold][k] - base).abs();
        }
    }
    let ticks: Vec<TickError> = (0..n_ticks)
        .map(|k| TickError {
            t: scenario.ticks[k],
            test: scenario.scored_test_at(scenario.ticks[k]),
            prior: prior[k] / folds as f64,
            post: post[k] / passes,
            baseline: baseline[k] / folds as f64,
            detect_rate: detect[k] / passes,
        })
        .collect();
    let mean = |f: &dyn Fn(&TickError) -> f64, sel: &dyn Fn(&TickError) -> bool| {
        let v: Vec<f64> = ticks.iter().filter(|e| sel(e)).map(f).collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let scored = |e: &TickError| e.test.is_some();
    let lead_in = |e: &TickError| e.t <= scenario.cfg.lead_in_s;
    let mean_prior = mean(&|e| e.prior, &scored);
    let mean_post = mean(&|e| e.post, &scored);
    let mean_baseline = mean(&|e| e.baseline, &scored);
    let frac = |m: f64| if mean_prior > 0.0 { 1.0 - m / mean_prior } else { 0.0 };
    Ok(ErrorReport {
        d_gw: run.d_gw,
        dt_s: run.dt_s,
        psr: run.psr,
        trials: run.trials,
        folds,
        mean_prior,
        mean_post,
        mean_baseline,
        correction: frac(mean_post),
        baseline_correction: frac(mean_baseline),
        quiet_post: mean(&|e| e.post, &lead_in),
        quiet_baseline: mean(&|e| e.baseline, &lead_in),
        ticks,
    })
}

pub fn write_tick_csv<W: Write>(report: &ErrorReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "test", "prior", "post", "baseline", "detect_rate"])?;
    for e in &report.ticks {
        w.write_record([
            format!("{:.0}", e.t),
            e.test.map_or(String::new(), |i| i.to_string()),
            format!("{:.4}", e.prior),
            format!("{:.4}", e.post),
            format!("{:.4}", e.baseline),
            format!("{:.4}", e.detect_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_COLUMNS: [&str; 9] =
    ["d_gw", "dt", "psr", "trials", "mean_prior", "mean_post", "mean_baseline", "correction", "baseline_correction"];

pub fn write_summary_csv<W: Write>(reports: &[ErrorReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in reports {
        w.write_record([
            format!("{:.0}", r.d_gw),
            format!("{:.0}", r.dt_s),
            format!("{:.4}", r.psr),
            r.trials.to_string(),
            format!("{:.4}", r.mean_prior),
            format!("{:.4}", r.mean_post),
            format!("{:.4}", r.mean_baseline),
            format!("{:.4}", r.correction),
            format!("{:.4}", r.baseline_correction),
        ])?;
    }
    w.flush()?;
    Ok(())
}
