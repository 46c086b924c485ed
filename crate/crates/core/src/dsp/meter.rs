use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::aweight::design_a_weighting;
use super::biquad::{BiquadSection, Cascade};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplMeterConfig {
    pub sample_rate: f64,
    pub frame_len: usize,
    /// Microphone sensitivity `C_s`, dBFS at the reference level.
    pub sensitivity_db: f64,
    /// Reference level `C_sr` the sensitivity is quoted at, dB SPL.
    pub reference_db: f64,
    /// Calibration constant `C_c`, dB.
    pub calibration_db: f64,
    pub frame_interval_s: f64,
    pub leq_duration_s: f64,
    /// Level reported for a silent frame.
    pub floor_db: f64,
    /// Equalizer biquad `[b0, b1, b2, a1, a2]`; identity by default.
    pub equalizer: [f64; 5],
}

impl Default for SplMeterConfig {
    fn default() -> Self {
        Self {
            sample_rate: 31_250.0,
            frame_len: 1024,
            sensitivity_db: -26.0,
            reference_db: 94.0,
            calibration_db: 0.0,
            frame_interval_s: 15.0,
            leq_duration_s: 900.0,
            floor_db: 20.0,
            equalizer: [1.0, 0.0, 0.0, 0.0, 0.0],
        }
    }
}

impl SplMeterConfig {
    /// History length `N_h = T / frame_interval`.
    pub fn history_len(&self) -> usize {
        (self.leq_duration_s / self.frame_interval_s).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 {
            return Err(Error::invalid("frame_len must be positive"));
        }
        if !(self.frame_interval_s > 0.0) || !(self.leq_duration_s > 0.0) {
            return Err(Error::invalid("frame interval and L_Aeq duration must be positive"));
        }
        let n_h = self.history_len();
        if n_h < 1 || (n_h as f64 * self.frame_interval_s - self.leq_duration_s).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "L_Aeq duration {} s is not a whole number of {} s frames",
                self.leq_duration_s, self.frame_interval_s
            )));
        }
        let [b0, b1, b2, a1, a2] = self.equalizer;
        if !BiquadSection::new(b0, b1, b2, a1, a2).is_stable() {
            return Err(Error::invalid("equalizer biquad is unstable"));
        }
        Ok(())
    }

    /// Digital RMS (full scale = 1) that reads as `level_db`.
    pub fn rms_for_level(&self, level_db: f64) -> f64 {
        10f64.powf((level_db - self.reference_db - self.calibration_db + self.sensitivity_db) / 20.0)
    }
}

/// Fast-weighted A level of an already filtered frame.
///
/// Returns [`Error::Silence`] when the frame RMS is zero; callers substitute
/// the configured floor.
pub fn laf(frame: &[f64], cfg: &SplMeterConfig) -> Result<f64> {
    if frame.is_empty() {
        return Err(Error::Empty("frame"));
    }
    let ms = frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64;
    if !ms.is_finite() {
        return Err(Error::NonFinite("frame"));
    }
    if ms == 0.0 {
        return Err(Error::Silence);
    }
    let rms = ms.sqrt();
    Ok(20.0 * (rms / 10f64.powf(cfg.sensitivity_db / 20.0)).log10() + cfg.reference_db + cfg.calibration_db)
}

/// Energy mean of an L_AF history.
pub fn laeq(history: &[f64]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Empty("L_AF history"));
    }
    let mean = history.iter().map(|l| 10f64.powf(l / 10.0)).sum::<f64>() / history.len() as f64;
    Ok(10.0 * mean.log10())
}

/// Sliding L_AF window of length `N_h`. Before the window fills, the
/// average runs over the frames seen so far.
#[derive(Debug, Clone)]
pub struct LaeqHistory {
    capacity: usize,
    values: VecDeque<f64>,
}

impl LaeqHistory {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), values: VecDeque::with_capacity(capacity.max(1)) }
    }

    pub fn push(&mut self, laf_db: f64) -> f64 {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(laf_db);
        self.value().expect("non-empty after push")
    }

    pub fn value(&self) -> Option<f64> {
        let (a, b) = self.values.as_slices();
        if a.is_empty() {
            return None;
        }
        let e: f64 = a.iter().chain(b).map(|l| 10f64.powf(l / 10.0)).sum();
        Some(10.0 * (e / self.values.len() as f64).log10())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Equalizer + A-weighting + L_AF/L_Aeq as run on the node.
///
/// Frames are captured after a sleep, so filter state is cleared before
/// each frame.
#[derive(Debug, Clone)]
pub struct SplMeter {
    cfg: SplMeterConfig,
    chain: Cascade,
    history: LaeqHistory,
    scratch: Vec<f64>,
}

impl SplMeter {
    pub fn new(cfg: SplMeterConfig) -> Result<Self> {
        cfg.validate()?;
        let [b0, b1, b2, a1, a2] = cfg.equalizer;
        let mut sections = vec![BiquadSection::new(b0, b1, b2, a1, a2)];
        sections.extend(design_a_weighting(cfg.sample_rate)?.sections);
        let history = LaeqHistory::new(cfg.history_len());
        Ok(Self { scratch: Vec::with_capacity(cfg.frame_len), cfg, chain: Cascade::new(sections), history })
    }

    pub fn config(&self) -> &SplMeterConfig {
        &self.cfg
    }

    pub fn chain(&self) -> &Cascade {
        &self.chain
    }

    /// Filters one raw frame and returns `(L_AF, L_Aeq)`.
    pub fn process_frame(&mut self, raw: &[f64]) -> Result<(f64, f64)> {
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("frame"));
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(raw);
        self.chain.reset();
        self.chain.process_in_place(&mut self.scratch);
        let l = match laf(&self.scratch, &self.cfg) {
            Ok(v) => v.max(self.cfg.floor_db),
            Err(Error::Silence) => self.cfg.floor_db,
            Err(e) => return Err(e),
        };
        Ok((l, self.history.push(l)))
    }

    pub fn history(&self) -> &LaeqHistory {
        &self.history
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg0() -> SplMeterConfig {
        SplMeterConfig { sensitivity_db: -26.0, reference_db: 0.0, calibration_db: 0.0, ..Default::default() }
    }

    fn constant_rms(rms: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| if i % 2 == 0 { rms } else { -rms }).collect()
    }

    #[test]
    fn laf_unit_argument_is_zero() {
        let c = cfg0();
        let rms = 10f64.powf(c.sensitivity_db / 20.0);
        assert!(laf(&constant_rms(rms, 1024), &c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn laf_hand_value() {
        let c = SplMeterConfig { reference_db: 94.0, ..cfg0() };
        let rms = 10.0 * 10f64.powf(c.sensitivity_db / 20.0);
        assert!((laf(&constant_rms(rms, 1024), &c).unwrap() - 114.0).abs() < 1e-9);
    }

    #[test]
    fn laf_doubling_adds_6db() {
        let c = SplMeterConfig::default();
        let f: Vec<f64> = (0..1024).map(|i| ((i * 37 % 101) as f64 - 50.0) * 1e-3).collect();
        let g: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
        let d = laf(&g, &c).unwrap() - laf(&f, &c).unwrap();
        assert!((d - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((d - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn silence_is_signalled_and_floored() {
        let c = SplMeterConfig::default();
        assert!(matches!(laf(&[0.0; 16], &c), Err(Error::Silence)));
        let mut m = SplMeter::new(c.clone()).unwrap();
        assert_eq!(m.process_frame(&[0.0; 1024]).unwrap().0, c.floor_db);
    }

    #[test]
    fn laeq_values() {
        assert!((laeq(&[63.0; 60]).unwrap() - 63.0).abs() < 1e-9);
        assert!((laeq(&[60.0, 70.0]).unwrap() - 67.40).abs() < 0.005);
        assert!(matches!(laeq(&[]), Err(Error::Empty(_))));
        let base = vec![70.0; 59];
        let mut with_quiet = base.clone();
        with_quiet.push(30.0);
        let mut with_same = base.clone();
        with_same.push(70.0);
        // Oracle in the energy domain: 59 units of 1e7 plus one of 1e3.
        let oracle = 10.0 * ((59.0 * 1e7 + 1e3) / 60.0f64).log10();
        assert!((laeq(&with_quiet).unwrap() - oracle).abs() < 1e-9);
        let expanded = 10.0 * ((59.0 * 1e7 + 1e3) / 59.0 / 1e7f64).log10();
        assert!(expanded.abs() < 0.05);
    }

    #[test]
    fn warm_up_averages_available_frames() {
        let mut h = LaeqHistory::new(60);
        assert_eq!(h.push(50.0), 50.0);
        let v = h.push(60.0);
        assert!((v - laeq(&[50.0, 60.0]).unwrap()).abs() < 1e-12);
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn config_validation() {
        let mut c = SplMeterConfig::default();
        assert_eq!(c.history_len(), 60);
        c.validate().unwrap();
        c.leq_duration_s = 100.0;
        assert!(c.validate().is_err());
        let c = SplMeterConfig { frame_len: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SplMeterConfig { equalizer: [1.0, 0.0, 0.0, 0.0, 1.5], ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn meter_reads_pure_tone_at_1khz() {
        let c = SplMeterConfig::default();
        let mut m = SplMeter::new(c.clone()).unwrap();
        let amp = c.rms_for_level(80.0) * 2f64.sqrt();
        let frame: Vec<f64> = (0..8192)
            .map(|n| amp * (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / c.sample_rate).sin())
            .collect();
        let (l, _) = m.process_frame(&frame).unwrap();
        // Start-up transient of the 20 Hz poles costs a little energy.
        assert!((l - 80.0).abs() < 0.3, "{l}");
    }
}
