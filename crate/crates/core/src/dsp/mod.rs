//! Software sound level meter: filter chain, L_AF / L_Aeq indicators,
//! wire quantization, foreground extraction and Kalman fusion.

pub mod aweight;
pub mod biquad;
pub mod kalman;
pub mod meter;
pub mod wire;

pub use aweight::design_a_weighting;
pub use biquad::{BiquadSection, Cascade};
pub use kalman::{foreground, kf_fuse, KfParams, ScalarKfState};
pub use meter::{laeq, laf, LaeqHistory, SplMeter, SplMeterConfig};
pub use wire::{quantize_db, SplSample};
