use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BAND_COUNT: usize = 7;
/// Octave band centres for band index 1..=7.
pub const BAND_FREQUENCIES_HZ: [f64; BAND_COUNT] = [8000.0, 4000.0, 2000.0, 1000.0, 500.0, 250.0, 125.0];

/// Directivity magnitude in dB for band index `band` (1..=7) at angle
/// `theta` off the source axis.
pub fn directivity(theta: f64, band: usize) -> Result<f64> {
    if !(1..=BAND_COUNT).contains(&band) {
        return Err(Error::BandIndex(band));
    }
    Ok(directivity_unchecked(theta.cos(), band))
}

#[inline]
pub(crate) fn directivity_unchecked(cos_theta: f64, band: usize) -> f64 {
    40.0 * ((cos_theta - 1.0) / (2.0 * band as f64 + 1.0))
}

/// Empty bands sit at -300 dB so every value stays finite.
fn band_level(level: f64, weight: f64) -> f64 {
    level + 10.0 * weight.max(1e-30).log10()
}

/// Wraps an angle to `[-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI && theta > 0.0 {
        PI
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub x: f64,
    pub y: f64,
    /// Per-band power, dB, ordered as [`BAND_FREQUENCIES_HZ`].
    pub band_power: [f64; BAND_COUNT],
    pub band_weights: [f64; BAND_COUNT],
    pub orientation: f64,
    /// Omnidirectional sources skip the directivity term.
    #[serde(default = "yes")]
    pub directional: bool,
}

fn yes() -> bool {
    true
}

impl PointSource {
    /// Total power `level` spread over bands by `weights` (normalized here).
    pub fn new(x: f64, y: f64, level: f64, weights: [f64; BAND_COUNT], orientation: f64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || !(total > 0.0) {
            return Err(Error::invalid("band weights must be non-negative with positive sum"));
        }
        let band_weights = weights.map(|w| w / total);
        Ok(Self {
            x,
            y,
            band_power: band_weights.map(|w| band_level(level, w)),
            band_weights,
            orientation,
            directional: true,
        })
    }

    pub fn omni(x: f64, y: f64, level: f64) -> Self {
        let mut weights = [0.0; BAND_COUNT];
        weights[3] = 1.0;
        Self {
            x,
            y,
            band_power: weights.map(|w| band_level(level, w)),
            band_weights: weights,
            orientation: 0.0,
            directional: false,
        }
    }

    /// Uniform-on-simplex band weights and uniform orientation.
    pub fn random<R: Rng + ?Sized>(x: f64, y: f64, level: f64, rng: &mut R) -> Self {
        let mut w = [0.0; BAND_COUNT];
        for v in &mut w {
            let e: f64 = Exp1.sample(rng);
            *v = e.max(1e-12);
        }
        let orientation = rng.random_range(-PI..PI);
        Self::new(x, y, level, w, orientation).expect("positive weights")
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Energetic sum of band powers, dB.
    pub fn level(&self) -> f64 {
        10.0 * self.band_power.iter().map(|p| 10f64.powf(p / 10.0)).sum::<f64>().log10()
    }

    /// Radiated power towards a receiver at bearing `bearing` (rad), linear.
    pub(crate) fn radiated_energy(&self, bearing: f64) -> f64 {
        if !self.directional {
            return self.band_power.iter().map(|p| 10f64.powf(p / 10.0)).sum();
        }
        let c = (bearing - self.orientation).cos();
        self.band_power
            .iter()
            .enumerate()
            .map(|(i, p)| 10f64.powf((p + directivity_unchecked(c, i + 1)) / 10.0))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn directivity_values() {
        for band in 1..=7 {
            assert_eq!(directivity(0.0, band).unwrap(), 0.0);
        }
        assert!((directivity(PI, 1).unwrap() - 40.0 * (-2.0 / 3.0)).abs() < 1e-9);
        assert!((directivity(PI, 1).unwrap() + 26.667).abs() < 1e-3);
        assert!((directivity(PI / 2.0, 3).unwrap() + 5.714).abs() < 1e-3);
        assert!(matches!(directivity(0.0, 0), Err(Error::BandIndex(0))));
        assert!(directivity(0.0, 8).is_err());
    }

    #[test]
    fn wrapping() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(PI) - PI).abs() < 1e-12);
        assert!(wrap_angle(0.25) == 0.25);
    }

    #[test]
    fn level_is_preserved() {
        let s = PointSource::new(1.0, 2.0, 97.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 0.3).unwrap();
        assert!((s.level() - 97.0).abs() < 1e-9);
        assert!((s.band_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((PointSource::omni(0.0, 0.0, 80.0).level() - 80.0).abs() < 1e-12);
        assert!(PointSource::new(0.0, 0.0, 90.0, [0.0; 7], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn even_and_non_increasing(theta in 0.0f64..PI, dt in 0.0f64..0.5, band in 1usize..=7) {
            let a = directivity(theta, band).unwrap();
            prop_assert!((a - directivity(-theta, band).unwrap()).abs() < 1e-12);
            prop_assert!(a <= 0.0);
            let further = (theta + dt).min(PI);
            prop_assert!(directivity(further, band).unwrap() <= a + 1e-12);
            prop_assert!(directivity(PI, band).unwrap() <= a + 1e-12);
        }
    }
}
