use noisemap::acoustics::Scene;
use noisemap::lorawan::{airtime, channel_sweep, q_function, write_sweep_csv, ChannelConfig, RadioParams};

fn sweep(dgw: &[f64], dt: &[f64], seed: u64) -> Vec<noisemap::lorawan::CellPsr> {
    channel_sweep(&Scene::default_urban().node_offsets(), dgw, dt, 400, seed, &ChannelConfig::default()).unwrap()
}

#[test]
fn success_falls_with_distance_and_rises_with_period() {
    let rows = sweep(&[500.0, 2000.0], &[300.0, 900.0], 1);
    let at = |d: f64, t: f64| rows.iter().find(|r| r.d_gw == d && r.dt_s == t).unwrap();
    assert!(at(500.0, 300.0).r_s_q > at(2000.0, 300.0).r_s_q);
    assert!(at(500.0, 300.0).r_s_c > at(2000.0, 300.0).r_s_c);
    assert!(at(2000.0, 900.0).r_s_c > at(2000.0, 300.0).r_s_c);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.r_s_cell));
        assert_eq!(r.r_s_q, at(r.d_gw, 300.0).r_s_q);
    }
}

#[test]
fn sweep_is_reproducible_and_seed_sensitive() {
    let a = sweep(&[1500.0], &[600.0], 9);
    assert_eq!(a, sweep(&[1500.0], &[600.0], 9));
    assert_ne!(a[0].r_s_c, sweep(&[1500.0], &[600.0], 10)[0].r_s_c);
    let mut csv = Vec::new();
    write_sweep_csv(&a, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("d_gw,dt,r_s_c,r_s_q,r_s_cell,packets_per_area_hour\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn airtime_doubles_per_spreading_factor_step_for_long_payloads() {
    // symbol time doubles while the symbol count shrinks slowly
    for sf in 7..12u8 {
        let p = RadioParams { sf, payload_len: 51, ..RadioParams::default() };
        let ratio = airtime(&p.with_sf(sf + 1)).unwrap() / airtime(&p).unwrap();
        assert!(ratio > 1.5 && ratio < 2.2, "sf {sf}: {ratio}");
    }
}

#[test]
fn q_function_reference_points() {
    assert!((q_function(0.0) - 0.5).abs() < 1e-12);
    assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-9);
    assert!((q_function(3.0) - 0.001_349_898_031_630).abs() < 1e-11);
}
