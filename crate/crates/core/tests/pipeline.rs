use noisemap::acoustics::{combine, render_map, PropagationConfig, Scene, NODES_PER_AREA};
use noisemap::dsp::{KfParams, SplMeterConfig, SplSample};
use noisemap::neural::{EventClassifier, SourceRegressor};
use noisemap::pipeline::{replay, EvaluationRun, FieldScenario, MapContext, Models, Pipeline, ReplayConfig, TickOutput};

fn models() -> Models {
    Models::new(EventClassifier::new(5), SourceRegressor::new(6)).unwrap()
}

fn sample(node: u16, t: f64, laf: f64, laeq: f64) -> SplSample {
    SplSample { node_id: node, t, laf, laeq }.quantized()
}

/// A short feed: every node reports every 300 s, node 2 jumps at 900 s.
fn feed() -> Vec<SplSample> {
    let mut out = Vec::new();
    for k in 0..6 {
        for n in 0..NODES_PER_AREA as u16 {
            let t = 300.0 * k as f64 + 10.0 * n as f64;
            let loud = n == 2 && k >= 3;
            out.push(sample(n, t, if loud { 78.0 } else { 52.0 }, if loud { 70.0 } else { 50.0 }));
        }
    }
    out
}

fn run(p: &mut Pipeline<'_>, feed: &[SplSample], skip: Option<u16>) -> Vec<TickOutput> {
    let mut out = Vec::new();
    let mut i = 0;
    for k in 1..=30 {
        let t = 60.0 * k as f64;
        while i < feed.len() && feed[i].t <= t {
            if Some(feed[i].node_id) != skip {
                p.ingest(&feed[i]).unwrap();
            }
            i += 1;
        }
        out.push(p.tick(t).unwrap());
    }
    out
}

#[test]
fn quiet_tick_renders_the_traffic_map() {
    let scene = Scene::default_urban();
    let ctx = MapContext::new(&scene, PropagationConfig::default());
    let quiet = TickOutput { t: 60.0, p_event: 0.1, prediction: None, degraded: false };
    let map = ctx.render(&quiet).unwrap();
    assert_eq!(map.values().len(), ctx.traffic.values().len());
    for (a, b) in map.values().iter().zip(ctx.traffic.values()) {
        assert!(a == b || (a.is_nan() && b.is_nan()));
    }
}

#[test]
fn event_map_is_traffic_combined_with_the_source() {
    let scene = Scene::default_urban();
    let prop = PropagationConfig::default();
    let ctx = MapContext::new(&scene, prop);
    let m = models();
    // threshold 0 forces a prediction once two nodes report
    let mut p = Pipeline::new(&m, KfParams::default(), 0.0, None).unwrap();
    let outs = run(&mut p, &feed(), None);
    let o = outs.iter().rev().find(|o| o.prediction.is_some()).expect("a prediction");
    let src = o.prediction.unwrap().source();
    let want = combine(&[&ctx.traffic, &render_map(&[src], &scene, &prop)]).unwrap();
    let got = ctx.render(o).unwrap();
    for (a, b) in got.values().iter().zip(want.values()) {
        assert!(a == b || (a.is_nan() && b.is_nan()));
    }
    for &pos in scene.nodes() {
        let (r, c) = got.cell_of(pos).unwrap();
        let single = ctx.level_at(o, pos).unwrap();
        assert!((single - got.get(r, c)).abs() < 1e-9, "{single} vs {}", got.get(r, c));
    }
}

#[test]
fn degraded_until_two_nodes_report_and_no_prediction_then() {
    let m = models();
    let mut p = Pipeline::new(&m, KfParams::default(), 0.0, None).unwrap();
    assert!(p.tick(0.0).unwrap().degraded);
    p.ingest(&sample(4, 5.0, 60.0, 55.0)).unwrap();
    let o = p.tick(60.0).unwrap();
    assert!(o.degraded && o.prediction.is_none());
    p.ingest(&sample(7, 65.0, 60.0, 55.0)).unwrap();
    let o = p.tick(120.0).unwrap();
    assert!(!o.degraded && o.prediction.is_some());
}

#[test]
fn held_out_node_never_influences_outputs() {
    let m = models();
    let feed = feed();
    for held in [0usize, 2, 8] {
        let mut with = Pipeline::new(&m, KfParams::default(), 0.0, Some(held)).unwrap();
        let mut without = Pipeline::new(&m, KfParams::default(), 0.0, Some(held)).unwrap();
        assert_eq!(run(&mut with, &feed, None), run(&mut without, &feed, Some(held as u16)));
    }
}

#[test]
fn rejects_ticks_behind_deliveries_and_bad_setup() {
    let m = models();
    let mut p = Pipeline::new(&m, KfParams::default(), 0.5, None).unwrap();
    p.ingest(&sample(0, 100.0, 60.0, 55.0)).unwrap();
    assert!(p.tick(90.0).is_err());
    assert!(p.ingest(&sample(0, 50.0, 60.0, 55.0)).is_err());
    assert!(p.ingest(&sample(9, 150.0, 60.0, 55.0)).is_err());
    assert!(Pipeline::new(&m, KfParams::default(), 1.5, None).is_err());
    assert!(Pipeline::new(&m, KfParams::default(), 0.5, Some(9)).is_err());
}

#[test]
fn replay_is_deterministic() {
    let scene = Scene::default_urban();
    let prop = PropagationConfig::default();
    let cfg = ReplayConfig { tests: 2, trials: 1, ..ReplayConfig::default() };
    let sim = || FieldScenario::simulate(&scene, &prop, &SplMeterConfig::default(), 1.0, &cfg, 21).unwrap();
    let (a, b) = (sim(), sim());
    assert_eq!(a.minute_levels, b.minute_levels);
    let ctx = MapContext::new(&scene, prop);
    let m = models();
    let run = EvaluationRun { d_gw: 1000.0, dt_s: 600.0, psr: 0.9, trials: 1, seed: 21 };
    let r1 = replay(&a, &ctx, &m, KfParams::default(), &run, None).unwrap();
    let r2 = replay(&b, &ctx, &m, KfParams::default(), &run, None).unwrap();
    assert_eq!(r1.mean_post.to_bits(), r2.mean_post.to_bits());
    assert_eq!(r1.ticks.len(), r2.ticks.len());
    assert!(r1.mean_prior > 0.0 && r1.mean_baseline > 0.0);
}
