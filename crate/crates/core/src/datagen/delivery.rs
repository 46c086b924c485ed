//! What the server sees: quantized samples delivered over a lossy uplink.

use rand::Rng;

use super::traces::NodeTraces;
use crate::dsp::SplSample;
use crate::error::Result;
use crate::lorawan::{sample_loss_trace, UplinkSchedule};

/// Uniform random phases in `[0, period)` for `n` nodes.
pub fn random_schedules<R: Rng + ?Sized>(n: usize, period_s: f64, r: &mut R) -> Vec<UplinkSchedule> {
    (0..n).map(|_| UplinkSchedule { phase_s: r.random_range(0.0..period_s), period_s }).collect()
}

/// Delivered samples per node in time order. Each uplink carries the
/// latest meter frame captured at or before its transmission time.
pub fn deliveries(
    traces: &NodeTraces,
    schedules: &[UplinkSchedule],
    psr: &[f64],
    horizon_s: f64,
    seed: u64,
) -> Result<Vec<Vec<SplSample>>> {
    let times = sample_loss_trace(schedules, psr, horizon_s, seed)?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(n, ts)| {
            ts.iter()
                .filter_map(|&t| {
                    let k = traces.frame_at(t)?;
                    Some(SplSample { node_id: n as u16, t, laf: traces.laf[n][k], laeq: traces.laeq[n][k] }.quantized())
                })
                .collect()
        })
        .collect())
}

/// The latest and the previous delivered samples at or before `t`.
pub fn latest_two(delivered: &[SplSample], t: f64) -> (Option<&SplSample>, Option<&SplSample>) {
    let k = delivered.partition_point(|s| s.t <= t);
    (k.checked_sub(1).map(|i| &delivered[i]), k.checked_sub(2).map(|i| &delivered[i]))
}

/// Per-node change in delivered L_Aeq between the two latest packets; 0
/// for nodes with fewer than two packets and for `held_out`.
pub fn delta_laeq(delivered: &[Vec<SplSample>], t: f64, held_out: Option<usize>) -> Vec<f64> {
    delivered
        .iter()
        .enumerate()
        .map(|(n, d)| match (held_out == Some(n), latest_two(d, t)) {
            (false, (Some(a), Some(b))) => a.laeq - b.laeq,
            _ => 0.0,
        })
        .collect()
}
