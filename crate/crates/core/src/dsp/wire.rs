//! Two-byte uplink payload: byte 0 = L_AF, byte 1 = L_Aeq,15min, each the
//! level in dB rounded to the nearest integer and clamped to `0..=255`.

use serde::{Deserialize, Serialize};

pub const PAYLOAD_LEN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplSample {
    pub node_id: u16,
    /// Measurement time, s.
    pub t: f64,
    pub laf: f64,
    pub laeq: f64,
}

pub fn quantize_db(db: f64) -> u8 {
    if db.is_nan() {
        return 0;
    }
    db.round().clamp(0.0, 255.0) as u8
}

impl SplSample {
    pub fn encode(&self) -> [u8; PAYLOAD_LEN] {
        [quantize_db(self.laf), quantize_db(self.laeq)]
    }

    pub fn decode(node_id: u16, t: f64, payload: [u8; PAYLOAD_LEN]) -> Self {
        Self { node_id, t, laf: f64::from(payload[0]), laeq: f64::from(payload[1]) }
    }

    /// The sample as the gateway sees it.
    pub fn quantized(&self) -> Self {
        Self::decode(self.node_id, self.t, self.encode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let s = SplSample { node_id: 3, t: 60.0, laf: 71.6, laeq: 64.49 };
        assert_eq!(s.encode(), [72, 64]);
        assert_eq!(quantize_db(-4.0), 0);
        assert_eq!(quantize_db(300.0), 255);
    }

    proptest! {
        #[test]
        fn round_trip_within_half_db(laf in 0.0f64..255.0, laeq in 0.0f64..255.0) {
            let s = SplSample { node_id: 1, t: 0.0, laf, laeq };
            let q = s.quantized();
            prop_assert!((q.laf - laf).abs() <= 0.5);
            prop_assert!((q.laeq - laeq).abs() <= 0.5);
        }
    }
}
