//! Dynamic noise mapping over LoRaWAN.
//!
//! * [`dsp`]: node-side sound level meter and server-side fusion helpers.
//! * [`acoustics`]: scenes, point sources, propagation and rasters.
//! * [`lorawan`]: uplink channel model and packet-loss traces.
//! * [`neural`]: event classifier and source regressor.
//! * [`datagen`]: synthetic scenarios and training datasets.
//! * [`pipeline`]: the per-minute map loop and the replay harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod config;
pub mod datagen;
pub mod dsp;
pub mod error;
pub mod lorawan;
pub mod neural;
pub mod pipeline;
pub mod rng;
pub mod workflow;

pub use error::{Error, Result};
