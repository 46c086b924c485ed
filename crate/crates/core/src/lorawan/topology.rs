use rand::Rng;
use serde::{Deserialize, Serialize};

use super::link::{assign_sf, LinkBudget};
use super::phy::{airtime, RadioParams};
use crate::acoustics::geometry::Point;
use crate::acoustics::scene::AREA_EXTENT_M;
use crate::error::Result;

pub const DEFAULT_CHANNELS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellNode {
    pub position: Point,
    pub distance_m: f64,
    pub area: usize,
    pub channel: usize,
    pub sf: u8,
    /// False when no policy SF clears the demodulation floor; such nodes
    /// still transmit at the highest policy SF.
    pub feasible: bool,
    pub airtime_s: f64,
    pub period_s: f64,
    pub phase_s: f64,
}

/// One gateway circle: every node of every area whose centre lies within
/// `d_gw` of the gateway, with static channel and SF assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTopology {
    pub gateway: Point,
    pub d_gw: f64,
    pub channels: usize,
    pub area_centers: Vec<Point>,
    pub nodes: Vec<CellNode>,
}

/// Area centres on a square grid of pitch `pitch` centred on the gateway.
pub fn area_centers(d_gw: f64, pitch: f64) -> Vec<Point> {
    let k = (d_gw / pitch).floor() as i64;
    let mut out = Vec::new();
    for j in -k..=k {
        for i in -k..=k {
            let c = [i as f64 * pitch, j as f64 * pitch];
            if c[0].hypot(c[1]) <= d_gw + 1e-9 {
                out.push(c);
            }
        }
    }
    out
}

impl CellTopology {
    /// Replicates `node_offsets` (relative to an area centre) across the
    /// cell. Channels are assigned round-robin; phases are uniform over the
    /// period.
    pub fn build<R: Rng + ?Sized>(
        node_offsets: &[Point],
        d_gw: f64,
        period_s: f64,
        radio: &RadioParams,
        budget: &LinkBudget,
        channels: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let centers = area_centers(d_gw, AREA_EXTENT_M);
        let mut nodes = Vec::with_capacity(centers.len() * node_offsets.len());
        let top_sf = *super::link::POLICY_SFS.last().expect("non-empty");
        for (area, c) in centers.iter().enumerate() {
            for off in node_offsets {
                let position = [c[0] + off[0], c[1] + off[1]];
                let distance_m = position[0].hypot(position[1]).max(1.0);
                let (sf, feasible) = match assign_sf(distance_m, radio, budget) {
                    Ok(sf) => (sf, true),
                    Err(_) => (top_sf, false),
                };
                let channel = nodes.len() % channels.max(1);
                nodes.push(CellNode {
                    position,
                    distance_m,
                    area,
                    channel,
                    sf,
                    feasible,
                    airtime_s: airtime(&radio.with_sf(sf))?,
                    period_s,
                    phase_s: rng.random_range(0.0..period_s),
                });
            }
        }
        Ok(Self { gateway: [0.0, 0.0], d_gw, channels: channels.max(1), area_centers: centers, nodes })
    }

    pub fn area_count(&self) -> usize {
        self.area_centers.len()
    }

    pub fn with_period(&self, period_s: f64) -> Self {
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.phase_s = n.phase_s / n.period_s * period_s;
            n.period_s = period_s;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn area_counts() {
        let n: Vec<usize> = [500.0, 1000.0, 1500.0, 2000.0].iter().map(|d| area_centers(*d, 250.0).len()).collect();
        assert_eq!(n, vec![13, 49, 113, 197]);
    }

    #[test]
    fn build_assigns_channels_and_sfs() {
        let offsets = vec![[0.0, 0.0], [50.0, 50.0], [-60.0, 20.0]];
        let t = CellTopology::build(
            &offsets,
            1000.0,
            300.0,
            &RadioParams::default(),
            &LinkBudget::default(),
            8,
            &mut rng::stream(1, 0),
        )
        .unwrap();
        assert_eq!(t.nodes.len(), 49 * 3);
        assert!(t.nodes.iter().all(|n| n.channel < 8 && (0.0..300.0).contains(&n.phase_s)));
        assert!(t.nodes.iter().all(|n| (8..=10).contains(&n.sf) && n.feasible));
        let per_channel = (0..8).map(|c| t.nodes.iter().filter(|n| n.channel == c).count()).collect::<Vec<_>>();
        assert!(per_channel.iter().max().unwrap() - per_channel.iter().min().unwrap() <= 1);
    }
}
