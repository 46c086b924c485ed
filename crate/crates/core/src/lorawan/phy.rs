use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LoRa modulation and framing parameters for one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub sf: u8,
    pub bandwidth_hz: f64,
    /// Coding rate index, 1..=4 for 4/5..4/8.
    pub cr: u8,
    pub crc: bool,
    /// Low data rate optimization.
    pub de: bool,
    pub preamble_symbols: u32,
    /// Physical payload, bytes.
    pub payload_len: u32,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self { sf: 7, bandwidth_hz: 125_000.0, cr: 1, crc: true, de: false, preamble_symbols: 8, payload_len: 15 }
    }
}

impl RadioParams {
    pub fn with_sf(self, sf: u8) -> Self {
        Self { sf, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(7..=12).contains(&self.sf) {
            return Err(Error::invalid(format!("SF {} outside 7..=12", self.sf)));
        }
        if !(1..=4).contains(&self.cr) {
            return Err(Error::invalid(format!("CR {} outside 1..=4", self.cr)));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        Ok(())
    }

    pub fn symbol_rate(&self) -> f64 {
        self.bandwidth_hz / f64::from(1u32 << self.sf)
    }

    /// Raw bit rate `SF * BW / 2^SF`.
    pub fn bit_rate(&self) -> f64 {
        f64::from(self.sf) * self.symbol_rate()
    }
}

/// Payload length in symbols, including the 8-symbol header block.
pub fn payload_symbols(p: &RadioParams) -> Result<u32> {
    p.validate()?;
    let sf = i64::from(p.sf);
    let denom = sf - 2 * i64::from(p.de);
    if denom <= 0 {
        return Err(Error::invalid("SF - 2 DE must be positive"));
    }
    let num = 2 * i64::from(p.payload_len) - sf + 7 + 4 * i64::from(p.crc);
    let blocks = if num <= 0 { 0 } else { (num + denom - 1) / denom };
    Ok(8 + (blocks * (i64::from(p.cr) + 4)) as u32)
}

/// On-air time of one packet, s.
pub fn airtime(p: &RadioParams) -> Result<f64> {
    let n = payload_symbols(p)?;
    Ok((4.25 + f64::from(p.preamble_symbols) + f64::from(n)) / p.symbol_rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let p10 = RadioParams::default().with_sf(10);
        assert_eq!(payload_symbols(&p10).unwrap(), 28);
        assert!((airtime(&p10).unwrap() - 40.25 / 122.070_312_5).abs() < 1e-12);
        assert!((airtime(&p10).unwrap() - 0.32973).abs() < 1e-5);
        let p7 = RadioParams::default();
        assert_eq!(payload_symbols(&p7).unwrap(), 33);
        assert!((airtime(&p7).unwrap() - 0.046336).abs() < 1e-6);
        let empty = RadioParams { sf: 12, payload_len: 0, crc: false, ..Default::default() };
        assert_eq!(payload_symbols(&empty).unwrap(), 8);
    }

    #[test]
    fn rejects_invalid() {
        assert!(payload_symbols(&RadioParams { sf: 6, ..Default::default() }).is_err());
        assert!(payload_symbols(&RadioParams { cr: 0, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn airtime_monotone(sf in 7u8..12, pl in 0u32..200) {
            let p = RadioParams { sf, payload_len: pl, ..Default::default() };
            let a = airtime(&p).unwrap();
            prop_assert!(airtime(&p.with_sf(sf + 1)).unwrap() > a);
            let longer = RadioParams { payload_len: pl + 8, ..p };
            let one_more = RadioParams { payload_len: pl + 1, ..p };
            prop_assert!(airtime(&longer).unwrap() > a);
            prop_assert!(airtime(&one_more).unwrap() >= a);
        }
    }
}
