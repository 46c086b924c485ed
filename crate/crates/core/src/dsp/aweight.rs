//! A-weighting as a cascade of three biquads.
//!
//! The analog weighting has a double pole at 20.6 Hz, single poles at
//! 107.7 Hz and 737.9 Hz, a double pole at 12.2 kHz and four zeros at DC.
//! The three low-frequency sections use the plain bilinear transform. The
//! 12.2 kHz section is bilinear-transformed with prewarping at 8 kHz so the
//! top octave band survives frequency warping at the node's 31.25 kHz rate.

use std::f64::consts::PI;

use super::biquad::{BiquadSection, Cascade};
use crate::error::{Error, Result};

pub const POLE_F1: f64 = 20.598_997;
pub const POLE_F2: f64 = 107.652_65;
pub const POLE_F3: f64 = 737.862_23;
pub const POLE_F4: f64 = 12_194.217;

const MIN_SAMPLE_RATE: f64 = 20_000.0;
const PREWARP_HZ: f64 = 8_000.0;

pub fn design_a_weighting(sample_rate: f64) -> Result<Cascade> {
    if !(sample_rate >= MIN_SAMPLE_RATE) {
        return Err(Error::SampleRateTooLow(sample_rate));
    }
    let w = |f: f64| 2.0 * PI * f;
    let (w1, w2, w3, w4) = (w(POLE_F1), w(POLE_F2), w(POLE_F3), w(POLE_F4));
    let k = 2.0 * sample_rate;
    let k_warp = 2.0 * PI * PREWARP_HZ / (PI * PREWARP_HZ / sample_rate).tan();

    let mut cascade = Cascade::new(vec![
        BiquadSection::from_analog([1.0, 0.0, 0.0], [1.0, 2.0 * w1, w1 * w1], k),
        BiquadSection::from_analog([1.0, 0.0, 0.0], [1.0, w2 + w3, w2 * w3], k),
        BiquadSection::from_analog([0.0, 0.0, w4 * w4], [1.0, 2.0 * w4, w4 * w4], k_warp),
    ]);
    let g1k = cascade.magnitude(1000.0, sample_rate);
    cascade.sections[0].scale(1.0 / g1k);
    Ok(cascade)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Standard analog A-weighting curve, normalized to 0 dB at 1 kHz.
    fn analog_a_db(f: f64) -> f64 {
        let r = |f: f64| {
            let f2 = f * f;
            POLE_F4.powi(2) * f2 * f2
                / ((f2 + POLE_F1.powi(2))
                    * ((f2 + POLE_F2.powi(2)) * (f2 + POLE_F3.powi(2))).sqrt()
                    * (f2 + POLE_F4.powi(2)))
        };
        20.0 * (r(f) / r(1000.0)).log10()
    }

    #[test]
    fn oracle_values() {
        assert!((analog_a_db(100.0) + 19.1).abs() < 0.1);
        assert!((analog_a_db(8000.0) + 1.1).abs() < 0.1);
    }

    #[test]
    fn anchors() {
        let c = design_a_weighting(31_250.0).unwrap();
        let fs = 31_250.0;
        assert!(c.gain_db(1000.0, fs).abs() < 0.1);
        assert!((c.gain_db(100.0, fs) - -19.1).abs() < 0.5);
        assert!((c.gain_db(8000.0, fs) - -1.1).abs() < 0.5);
    }

    #[test]
    fn tracks_analog_curve_across_octaves() {
        for fs in [31_250.0, 48_000.0] {
            let c = design_a_weighting(fs).unwrap();
            for f in [31.5, 63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0] {
                let err = c.gain_db(f, fs) - analog_a_db(f);
                assert!(err.abs() < 0.5, "fs {fs} f {f}: {err}");
            }
        }
    }

    #[test]
    fn sections_stable() {
        let c = design_a_weighting(31_250.0).unwrap();
        assert!(c.sections.iter().all(BiquadSection::is_stable));
    }

    #[test]
    fn rejects_low_rate() {
        assert!(matches!(design_a_weighting(16_000.0), Err(Error::SampleRateTooLow(_))));
        assert!(design_a_weighting(f64::NAN).is_err());
    }
}
