use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Second-order IIR section, transposed direct form II.
///
/// Coefficients are normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiquadSection {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
    #[serde(skip)]
    z1: f64,
    #[serde(skip)]
    z2: f64,
}

impl BiquadSection {
    pub fn new(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Self {
        Self { b0, b1, b2, a1, a2, z1: 0.0, z2: 0.0 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Bilinear transform of `(n0 s^2 + n1 s + n2) / (d0 s^2 + d1 s + d2)`
    /// with `s = k (z - 1) / (z + 1)`. Plain bilinear uses `k = 2 fs`.
    pub fn from_analog(num: [f64; 3], den: [f64; 3], k: f64) -> Self {
        let k2 = k * k;
        let b0 = num[0] * k2 + num[1] * k + num[2];
        let b1 = 2.0 * num[2] - 2.0 * num[0] * k2;
        let b2 = num[0] * k2 - num[1] * k + num[2];
        let a0 = den[0] * k2 + den[1] * k + den[2];
        let a1 = 2.0 * den[2] - 2.0 * den[0] * k2;
        let a2 = den[0] * k2 - den[1] * k + den[2];
        Self::new(b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0)
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn reset(&mut self) {
        self.z1 = 0.0;
        self.z2 = 0.0;
    }

    pub fn scale(&mut self, gain: f64) {
        self.b0 *= gain;
        self.b1 *= gain;
        self.b2 *= gain;
    }

    /// Both poles strictly inside the unit circle (stability triangle).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    /// Linear magnitude at `freq` Hz.
    pub fn magnitude(&self, freq: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq / sample_rate;
        let (c1, s1) = (w.cos(), w.sin());
        let (c2, s2) = ((2.0 * w).cos(), (2.0 * w).sin());
        let nr = self.b0 + self.b1 * c1 + self.b2 * c2;
        let ni = -(self.b1 * s1 + self.b2 * s2);
        let dr = 1.0 + self.a1 * c1 + self.a2 * c2;
        let di = -(self.a1 * s1 + self.a2 * s2);
        ((nr * nr + ni * ni) / (dr * dr + di * di)).sqrt()
    }
}

/// Series connection of sections.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Cascade {
    pub sections: Vec<BiquadSection>,
}

impl Cascade {
    pub fn new(sections: Vec<BiquadSection>) -> Self {
        Self { sections }
    }

    pub fn reset(&mut self) {
        self.sections.iter_mut().for_each(BiquadSection::reset);
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.sections.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn process_in_place(&mut self, frame: &mut [f64]) {
        for s in &mut self.sections {
            for v in frame.iter_mut() {
                *v = s.process(*v);
            }
        }
    }

    pub fn magnitude(&self, freq: f64, sample_rate: f64) -> f64 {
        self.sections.iter().map(|s| s.magnitude(freq, sample_rate)).product()
    }

    pub fn gain_db(&self, freq: f64, sample_rate: f64) -> f64 {
        20.0 * self.magnitude(freq, sample_rate).log10()
    }

    /// Mean power gain for white input, by midpoint integration over (0, fs/2).
    pub fn white_noise_power_gain(&self, sample_rate: f64) -> f64 {
        const N: usize = 8192;
        let df = sample_rate / 2.0 / N as f64;
        (0..N)
            .map(|i| self.magnitude((i as f64 + 0.5) * df, sample_rate).powi(2))
            .sum::<f64>()
            / N as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_in_zero_out() {
        let mut s = BiquadSection::new(0.3, 0.2, 0.1, -0.5, 0.2);
        assert!(s.is_stable());
        assert!((0..64).all(|_| s.process(0.0) == 0.0));
    }

    #[test]
    fn identity_passes_through() {
        let mut s = BiquadSection::identity();
        for x in [1.0, -2.5, 0.125] {
            assert_eq!(s.process(x), x);
        }
        assert!((s.magnitude(1234.0, 48_000.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unstable_detected() {
        assert!(!BiquadSection::new(1.0, 0.0, 0.0, 0.0, 1.0).is_stable());
        assert!(!BiquadSection::new(1.0, 0.0, 0.0, -2.1, 1.0).is_stable());
    }

    #[test]
    fn magnitude_matches_impulse_response_dft() {
        let mut s = BiquadSection::new(0.2, 0.4, 0.2, -0.6, 0.25);
        let h: Vec<f64> = (0..4096).map(|n| s.process(if n == 0 { 1.0 } else { 0.0 })).collect();
        let fs = 8000.0;
        for f in [100.0, 1000.0, 3000.0] {
            let w = 2.0 * PI * f / fs;
            let (re, im) = h.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, v)| {
                (re + v * (w * n as f64).cos(), im - v * (w * n as f64).sin())
            });
            assert!(((re * re + im * im).sqrt() - s.magnitude(f, fs)).abs() < 1e-9);
        }
    }
}
