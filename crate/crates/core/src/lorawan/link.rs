//! Link-quality packet success: log-distance path loss with shadowing,
//! SNR, Eb/N0, a Q-function BER and independent bit errors.

use serde::{Deserialize, Serialize};

use super::phy::{airtime, RadioParams};
use crate::error::{Error, Result};

pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
/// Spreading factors the static assignment policy may use.
pub const POLICY_SFS: [u8; 4] = [7, 8, 9, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub path_loss_exponent: f64,
    pub d0_m: f64,
    pub path_loss_d0_db: f64,
    pub shadowing_sigma_db: f64,
    /// Demodulation SNR floor for SF7..=SF12, dB.
    pub demod_snr_floor_db: [f64; 6],
    /// Receiver sensitivity for SF7..=SF12, dBm. `None` derives it from the
    /// noise floor plus the demodulation floor.
    pub sensitivity_dbm: Option<[f64; 6]>,
    /// Feed Eb/N0 to the BER expression in linear units instead of dB.
    pub ber_ebn0_linear: bool,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            tx_gain_dbi: 2.5,
            rx_gain_dbi: 6.0,
            noise_figure_db: 3.0,
            path_loss_exponent: 2.08,
            d0_m: 40.0,
            path_loss_d0_db: 127.41,
            shadowing_sigma_db: 3.57,
            demod_snr_floor_db: [-7.5, -10.0, -12.5, -15.0, -17.5, -20.0],
            sensitivity_dbm: None,
            ber_ebn0_linear: false,
        }
    }
}

fn sf_index(sf: u8) -> usize {
    usize::from(sf.clamp(7, 12) - 7)
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.shadowing_sigma_db >= 0.0) || !(self.d0_m > 0.0) {
            return Err(Error::invalid("link budget needs sigma >= 0 and d0 > 0"));
        }
        Ok(())
    }

    pub fn path_loss_db(&self, d: f64, shadowing_db: f64) -> f64 {
        self.path_loss_d0_db + 10.0 * self.path_loss_exponent * (d / self.d0_m).log10() + shadowing_db
    }

    pub fn received_power_dbm(&self, d: f64, shadowing_db: f64) -> f64 {
        self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi - self.path_loss_db(d, shadowing_db)
    }

    pub fn noise_floor_dbm(&self, bandwidth_hz: f64) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn snr_db(&self, d: f64, shadowing_db: f64, bandwidth_hz: f64) -> f64 {
        self.received_power_dbm(d, shadowing_db) - self.noise_floor_dbm(bandwidth_hz)
    }

    pub fn demod_floor_db(&self, sf: u8) -> f64 {
        self.demod_snr_floor_db[sf_index(sf)]
    }

    pub fn sensitivity_dbm(&self, sf: u8, bandwidth_hz: f64) -> f64 {
        match &self.sensitivity_dbm {
            Some(s) => s[sf_index(sf)],
            None => self.noise_floor_dbm(bandwidth_hz) + self.demod_floor_db(sf),
        }
    }
}

/// Gaussian tail probability via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Eb/N0 = SNR - 10 log10(SF * 4/(4+CR) / 2^SF)`, dB.
pub fn ebn0_db(snr_db: f64, p: &RadioParams) -> f64 {
    let sf = f64::from(p.sf);
    let ratio = sf * 4.0 / (4.0 + f64::from(p.cr)) / f64::from(1u32 << p.sf);
    snr_db - 10.0 * ratio.log10()
}

/// Bit error rate for one link realization; 1 below the demodulation or
/// sensitivity limits.
pub fn bit_error_rate(d: f64, p: &RadioParams, b: &LinkBudget, shadowing_db: f64) -> f64 {
    let pr = b.received_power_dbm(d, shadowing_db);
    let snr = pr - b.noise_floor_dbm(p.bandwidth_hz);
    if snr < b.demod_floor_db(p.sf) || pr < b.sensitivity_dbm(p.sf, p.bandwidth_hz) {
        return 1.0;
    }
    let ebn0 = ebn0_db(snr, p);
    let ebn0 = if b.ber_ebn0_linear { 10f64.powf(ebn0 / 10.0) } else { ebn0 };
    let log12_sf = f64::from(p.sf).ln() / 12f64.ln();
    q_function(log12_sf / std::f64::consts::SQRT_2 * ebn0)
}

/// Packet length in bits, `ceil(airtime * R_b)`.
pub fn packet_bits(p: &RadioParams) -> Result<u64> {
    Ok((airtime(p)? * p.bit_rate()).ceil() as u64)
}

/// `(1 - BER)^n` for a link at distance `d` with shadowing draw `shadowing_db`.
pub fn link_quality_psr(d: f64, p: &RadioParams, b: &LinkBudget, shadowing_db: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid("link distance must be positive"));
    }
    let n = packet_bits(p)?;
    let ber = bit_error_rate(d, p, b, shadowing_db);
    Ok((1.0 - ber).powf(n as f64))
}

/// Static SF policy: the smallest SF in 7..=10 whose shadowing-free SNR
/// clears its floor, plus one when that stays within 10.
pub fn assign_sf(d: f64, radio: &RadioParams, b: &LinkBudget) -> Result<u8> {
    let snr = b.snr_db(d, 0.0, radio.bandwidth_hz);
    let base = POLICY_SFS
        .iter()
        .copied()
        .find(|&sf| snr >= b.demod_floor_db(sf))
        .ok_or(Error::InfeasibleLink { distance_m: d })?;
    Ok((base + 1).min(*POLICY_SFS.last().expect("non-empty")))
}
