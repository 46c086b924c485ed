//! C ABI over the noisemap library.
//!
//! Every function returns an [`NmStatus`]; results come back through out
//! pointers. Objects are opaque handles created by `*_new`/`*_load` and
//! released by the matching `*_free`. The text of the last error on the
//! calling thread is available from [`nm_last_error`].
//!
//! A pipeline borrows its models: free every pipeline before the models it
//! was created from.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! documents: out pointers writable, arrays readable for the given length,
//! strings NUL-terminated, handles obtained from this library and not yet
//! freed. Handles are not thread-safe; use each from one thread at a time.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use noisemap::dsp::{SplMeter, SplMeterConfig, SplSample};
use noisemap::lorawan::{airtime, payload_symbols, RadioParams};
use noisemap::neural::Checkpoint;
use noisemap::pipeline::{Models, Pipeline};
use noisemap::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Model = 5,
    /// A Rust panic was caught at the boundary; the handle may be unusable.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> NmStatus {
    match e {
        Error::Io(_) => NmStatus::Io,
        Error::Json(_) | Error::Csv(_) | Error::Toml(_) | Error::Parse { .. } => NmStatus::Parse,
        Error::Checkpoint(_) | Error::ShapeMismatch(_) => NmStatus::Model,
        _ => NmStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (NmStatus, String)>) -> NmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NmStatus::Internal
        }
    }
}

fn lib(e: Error) -> (NmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NmStatus, String) {
    (NmStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn nm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// On-air time in seconds and payload symbols for the default radio
/// (125 kHz, CR 4/5, CRC on, 8-symbol preamble) at `sf` and `payload_len`.
#[no_mangle]
pub unsafe extern "C" fn nm_airtime(sf: u8, payload_len: u32, out_seconds: *mut f64, out_symbols: *mut u32) -> NmStatus {
    guard(|| {
        if out_seconds.is_null() {
            return Err(null("out_seconds"));
        }
        let p = RadioParams { sf, payload_len, ..RadioParams::default() };
        *out_seconds = airtime(&p).map_err(lib)?;
        if !out_symbols.is_null() {
            *out_symbols = payload_symbols(&p).map_err(lib)?;
        }
        Ok(())
    })
}

/// Two-byte uplink payload for one measurement.
#[no_mangle]
pub unsafe extern "C" fn nm_encode_sample(laf_db: f64, laeq_db: f64, out_payload: *mut u8) -> NmStatus {
    guard(|| {
        if out_payload.is_null() {
            return Err(null("out_payload"));
        }
        let bytes = SplSample { node_id: 0, t: 0.0, laf: laf_db, laeq: laeq_db }.encode();
        ptr::copy_nonoverlapping(bytes.as_ptr(), out_payload, bytes.len());
        Ok(())
    })
}

/// Sound level meter handle.
pub struct NmMeter(SplMeter);

/// Meter with the default configuration at `sample_rate` and `frame_len`.
#[no_mangle]
pub unsafe extern "C" fn nm_meter_new(sample_rate: f64, frame_len: usize, out: *mut *mut NmMeter) -> NmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SplMeterConfig { sample_rate, frame_len, ..SplMeterConfig::default() };
        let m = SplMeter::new(cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(NmMeter(m)));
        Ok(())
    })
}

/// Filters one raw frame; writes L_AF and the running L_Aeq in dB.
#[no_mangle]
pub unsafe extern "C" fn nm_meter_process(meter: *mut NmMeter, frame: *const f64, len: usize, out_laf: *mut f64, out_laeq: *mut f64) -> NmStatus {
    guard(|| {
        let m = meter.as_mut().ok_or_else(|| null("meter"))?;
        if frame.is_null() || out_laf.is_null() || out_laeq.is_null() {
            return Err(null("frame or output"));
        }
        let (laf, laeq) = m.0.process_frame(std::slice::from_raw_parts(frame, len)).map_err(lib)?;
        *out_laf = laf;
        *out_laeq = laeq;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nm_meter_free(meter: *mut NmMeter) {
    if !meter.is_null() {
        drop(Box::from_raw(meter));
    }
}

/// Trained classifier and regressor.
pub struct NmModels(Models);

/// Loads `classifier.json` and `regressor.json` from directory `dir`.
#[no_mangle]
pub unsafe extern "C" fn nm_models_load(dir: *const c_char, out: *mut *mut NmModels) -> NmStatus {
    guard(|| {
        if dir.is_null() || out.is_null() {
            return Err(null("dir or out"));
        }
        let dir = CStr::from_ptr(dir).to_str().map_err(|e| (NmStatus::InvalidArgument, e.to_string()))?;
        let dir = Path::new(dir);
        let c = Checkpoint::load(&dir.join("classifier.json")).map_err(lib)?;
        let r = Checkpoint::load(&dir.join("regressor.json")).map_err(lib)?;
        let models = Models::new(c.classifier().map_err(lib)?.clone(), r.regressor().map_err(lib)?.clone()).map_err(lib)?;
        *out = Box::into_raw(Box::new(NmModels(models)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nm_models_free(models: *mut NmModels) {
    if !models.is_null() {
        drop(Box::from_raw(models));
    }
}

/// Per-area map pipeline.
pub struct NmPipeline(Pipeline<'static>);

/// Output of one map update.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmTick {
    pub p_event: f64,
    /// 1 if a source was predicted; `x`, `y`, `level` are then valid.
    pub has_source: u8,
    pub x: f64,
    pub y: f64,
    pub level: f64,
    /// 1 if fewer than two nodes have ever delivered.
    pub degraded: u8,
}

/// Pipeline over `models` with the default fusion filter and threshold 0.5.
/// `held_out` is a node index whose data is ignored, or -1.
#[no_mangle]
pub unsafe extern "C" fn nm_pipeline_new(models: *const NmModels, held_out: i32, out: *mut *mut NmPipeline) -> NmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // The caller keeps `models` alive for the pipeline's lifetime.
        let models: &'static NmModels = models.as_ref().ok_or_else(|| null("models"))?;
        let held = usize::try_from(held_out).ok();
        let p = Pipeline::new(&models.0, Default::default(), 0.5, held).map_err(lib)?;
        *out = Box::into_raw(Box::new(NmPipeline(p)));
        Ok(())
    })
}

/// Delivers one 2-byte payload from `node_id` measured at `t` seconds.
#[no_mangle]
pub unsafe extern "C" fn nm_pipeline_ingest(pipeline: *mut NmPipeline, node_id: u16, t: f64, payload: *const u8) -> NmStatus {
    guard(|| {
        let p = pipeline.as_mut().ok_or_else(|| null("pipeline"))?;
        if payload.is_null() {
            return Err(null("payload"));
        }
        let bytes = [*payload, *payload.add(1)];
        p.0.ingest(&SplSample::decode(node_id, t, bytes)).map_err(lib)
    })
}

/// Map update at `t` seconds.
#[no_mangle]
pub unsafe extern "C" fn nm_pipeline_tick(pipeline: *mut NmPipeline, t: f64, out: *mut NmTick) -> NmStatus {
    guard(|| {
        let p = pipeline.as_mut().ok_or_else(|| null("pipeline"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o = p.0.tick(t).map_err(lib)?;
        *out = NmTick { p_event: o.p_event, degraded: u8::from(o.degraded), ..NmTick::default() };
        if let Some(s) = o.prediction {
            out.has_source = 1;
            out.x = s.x;
            out.y = s.y;
            out.level = s.level;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nm_pipeline_free(pipeline: *mut NmPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}
