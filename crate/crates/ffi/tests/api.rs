use std::ffi::{c_char, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use noisemap::dsp::{SplMeter, SplMeterConfig, SplSample};
use noisemap::neural::{Checkpoint, EventClassifier, Model, SourceRegressor};
use noisemap_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { nm_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn write_models(dir: &Path) {
    Checkpoint::new(Model::Classifier(EventClassifier::new(1)), 1, "test", None).save(&dir.join("classifier.json")).unwrap();
    Checkpoint::new(Model::Regressor(SourceRegressor::new(2)), 2, "test", None).save(&dir.join("regressor.json")).unwrap();
}

fn load_models(dir: &Path) -> *mut NmModels {
    let path = CString::new(dir.to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { nm_models_load(path.as_ptr(), &mut m) }, NmStatus::Ok, "{}", last_error());
    m
}

#[test]
fn header_is_current() {
    let generated = include_str!(concat!(env!("OUT_DIR"), "/noisemap.h"));
    let checked_in = include_str!("../include/noisemap.h");
    assert_eq!(generated, checked_in, "run the build and copy OUT_DIR/noisemap.h to include/");
}

#[test]
fn airtime_matches_closed_form() {
    let (mut s, mut n) = (0.0, 0u32);
    assert_eq!(unsafe { nm_airtime(10, 15, &mut s, &mut n) }, NmStatus::Ok);
    assert_eq!(n, 28);
    assert!((s - 40.25 * 1024.0 / 125_000.0).abs() < 1e-12);
    // symbols are optional
    assert_eq!(unsafe { nm_airtime(7, 15, &mut s, ptr::null_mut()) }, NmStatus::Ok);
    assert!((s - 0.046336).abs() < 1e-6);
}

#[test]
fn errors_set_status_and_message() {
    let mut s = 0.0;
    assert_eq!(unsafe { nm_airtime(7, 15, ptr::null_mut(), ptr::null_mut()) }, NmStatus::NullPointer);
    assert!(last_error().contains("out_seconds"));
    assert_eq!(unsafe { nm_airtime(13, 15, &mut s, ptr::null_mut()) }, NmStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    let dir = CString::new("/nonexistent/models").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { nm_models_load(dir.as_ptr(), &mut m) }, NmStatus::Io);
    assert!(m.is_null());

    let mut tick = NmTick::default();
    assert_eq!(unsafe { nm_pipeline_tick(ptr::null_mut(), 0.0, &mut tick) }, NmStatus::NullPointer);
    // freeing null is a no-op
    unsafe {
        nm_meter_free(ptr::null_mut());
        nm_models_free(ptr::null_mut());
        nm_pipeline_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    unsafe { nm_airtime(7, 15, ptr::null_mut(), ptr::null_mut()) };
    let mut buf = [1 as c_char; 4];
    let full = unsafe { nm_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 3);
    assert_eq!(buf[3], 0);
    assert_eq!(unsafe { nm_last_error(ptr::null_mut(), 0) }, full);
}

#[test]
fn meter_matches_library() {
    let cfg = SplMeterConfig::default();
    let mut reference = SplMeter::new(cfg.clone()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { nm_meter_new(cfg.sample_rate, cfg.frame_len, &mut m) }, NmStatus::Ok);
    for k in 1..4 {
        let frame: Vec<f64> = (0..cfg.frame_len)
            .map(|i| 0.003 * k as f64 * (std::f64::consts::TAU * 1000.0 * i as f64 / cfg.sample_rate).sin())
            .collect();
        let (mut laf, mut laeq) = (0.0, 0.0);
        assert_eq!(unsafe { nm_meter_process(m, frame.as_ptr(), frame.len(), &mut laf, &mut laeq) }, NmStatus::Ok);
        assert_eq!((laf, laeq), reference.process_frame(&frame).unwrap());
    }
    let bad = [f64::NAN; 4];
    let (mut laf, mut laeq) = (0.0, 0.0);
    assert_eq!(unsafe { nm_meter_process(m, bad.as_ptr(), 4, &mut laf, &mut laeq) }, NmStatus::InvalidArgument);
    unsafe { nm_meter_free(m) };

    let mut m = ptr::null_mut();
    assert_ne!(unsafe { nm_meter_new(100.0, 1024, &mut m) }, NmStatus::Ok);
    assert!(m.is_null());
}

#[test]
fn encode_matches_wire_format() {
    let mut buf = [0u8; 2];
    assert_eq!(unsafe { nm_encode_sample(63.4, 58.6, buf.as_mut_ptr()) }, NmStatus::Ok);
    assert_eq!(buf, SplSample { node_id: 0, t: 0.0, laf: 63.4, laeq: 58.6 }.encode());
}

#[test]
fn pipeline_degrades_until_two_nodes_report() {
    let dir = tempfile::tempdir().unwrap();
    write_models(dir.path());
    let models = load_models(dir.path());
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { nm_pipeline_new(models, -1, &mut p) }, NmStatus::Ok);

    let mut payload = [0u8; 2];
    unsafe { nm_encode_sample(55.0, 52.0, payload.as_mut_ptr()) };
    let mut tick = NmTick::default();
    assert_eq!(unsafe { nm_pipeline_ingest(p, 0, 30.0, payload.as_ptr()) }, NmStatus::Ok);
    assert_eq!(unsafe { nm_pipeline_tick(p, 60.0, &mut tick) }, NmStatus::Ok);
    assert_eq!((tick.degraded, tick.has_source), (1, 0));

    assert_eq!(unsafe { nm_pipeline_ingest(p, 1, 90.0, payload.as_ptr()) }, NmStatus::Ok);
    assert_eq!(unsafe { nm_pipeline_tick(p, 120.0, &mut tick) }, NmStatus::Ok);
    assert_eq!(tick.degraded, 0);
    assert!((0.0..=1.0).contains(&tick.p_event));

    // a tick older than a delivery is rejected
    assert_ne!(unsafe { nm_pipeline_tick(p, 60.0, &mut tick) }, NmStatus::Ok);
    assert_eq!(unsafe { nm_pipeline_ingest(p, 0, 150.0, ptr::null()) }, NmStatus::NullPointer);
    unsafe {
        nm_pipeline_free(p);
        nm_models_free(models);
    }
}

#[test]
fn held_out_node_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    write_models(dir.path());
    let models = load_models(dir.path());
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { nm_pipeline_new(models, 1, &mut p) }, NmStatus::Ok);
    let payload = [110u8, 104u8];
    let mut tick = NmTick::default();
    unsafe {
        nm_pipeline_ingest(p, 0, 10.0, payload.as_ptr());
        nm_pipeline_ingest(p, 1, 20.0, payload.as_ptr());
        nm_pipeline_tick(p, 60.0, &mut tick);
    }
    assert_eq!(tick.degraded, 1);
    unsafe {
        nm_pipeline_free(p);
        nm_models_free(models);
    }
}

/// `libnoisemap_ffi.a` from the profile directory or its `deps/`.
fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary>
    let deps = std::env::current_exe().ok()?.parent()?.to_owned();
    [deps.join("libnoisemap_ffi.a"), deps.parent()?.join("libnoisemap_ffi.a")].into_iter().find(|p| p.exists())
}

#[test]
fn c_program_links_against_static_library() {
    let have_cc = Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success());
    let Some(lib) = static_lib().filter(|_| have_cc) else {
        eprintln!("skipping: static library or C compiler not found");
        return;
    };
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
