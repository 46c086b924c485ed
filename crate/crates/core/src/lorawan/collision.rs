//! Monte-Carlo time-overlap collisions.
//!
//! Each trial draws every node's packet midpoint uniformly over its period.
//! A packet is lost when another packet on the same channel has its
//! midpoint closer than half the summed airtimes, taking periodic repeats
//! into account.

use rand::Rng;

use super::topology::CellTopology;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEstimate {
    /// Collision-based success rate `r_s,c`.
    pub success: f64,
    /// Standard error of `success` across trials.
    pub std_err: f64,
    pub trials: usize,
}

/// Distance from `tx` to the nearest repeat of a packet at `ty` with period `py`.
#[inline]
fn periodic_gap(tx: f64, ty: f64, py: f64) -> f64 {
    let m = (tx - ty).rem_euclid(py);
    m.min(py - m)
}

struct Member {
    t: f64,
    airtime: f64,
    period: f64,
}

/// Marks collided packets within one channel group.
fn mark_group(members: &mut [Member], hit: &mut [bool]) {
    let n = members.len();
    if n < 2 {
        return;
    }
    let period = members[0].period;
    let uniform = members.iter().all(|m| m.period == period);
    if !uniform {
        for x in 0..n {
            for y in 0..n {
                if x != y
                    && periodic_gap(members[x].t, members[y].t, members[y].period)
                        < (members[x].airtime + members[y].airtime) / 2.0
                {
                    hit[x] = true;
                    break;
                }
            }
        }
        return;
    }
    // Shared period: sort by midpoint and sweep the circle both ways.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| members[a].t.total_cmp(&members[b].t));
    let max_air = members.iter().map(|m| m.airtime).fold(0.0, f64::max);
    for (k, &x) in order.iter().enumerate() {
        let reach = (members[x].airtime + max_air) / 2.0;
        for step in 1..n {
            let y = order[(k + step) % n];
            let gap = (members[y].t - members[x].t).rem_euclid(period);
            if gap >= reach {
                break;
            }
            if gap < (members[x].airtime + members[y].airtime) / 2.0 {
                hit[x] = true;
                break;
            }
        }
        if hit[x] {
            continue;
        }
        for step in 1..n {
            let y = order[(k + n - step) % n];
            let gap = (members[x].t - members[y].t).rem_euclid(period);
            if gap >= reach {
                break;
            }
            if gap < (members[x].airtime + members[y].airtime) / 2.0 {
                hit[x] = true;
                break;
            }
        }
    }
}

/// Fraction of packets lost in one draw of phases.
fn trial_loss(topo: &CellTopology, same_sf_only: bool, rng: &mut rng::Rng) -> f64 {
    let n = topo.nodes.len();
    let phases: Vec<f64> = topo.nodes.iter().map(|node| rng.random_range(0.0..node.period_s)).collect();
    let key = |i: usize| {
        let node = &topo.nodes[i];
        if same_sf_only {
            node.channel * 16 + usize::from(node.sf)
        } else {
            node.channel
        }
    };
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        groups.entry(key(i)).or_default().push(i);
    }
    let mut lost = 0usize;
    for idx in groups.values() {
        let mut members: Vec<Member> = idx
            .iter()
            .map(|&i| Member { t: phases[i], airtime: topo.nodes[i].airtime_s, period: topo.nodes[i].period_s })
            .collect();
        let mut hit = vec![false; members.len()];
        mark_group(&mut members, &mut hit);
        lost += hit.iter().filter(|h| **h).count();
    }
    lost as f64 / n as f64
}

pub fn collision_psr(topo: &CellTopology, trials: usize, seed: u64, same_sf_only: bool) -> CollisionEstimate {
    let trials = trials.max(1);
    if topo.nodes.len() < 2 {
        return CollisionEstimate { success: 1.0, std_err: 0.0, trials };
    }
    let losses: Vec<f64> =
        (0..trials).map(|t| trial_loss(topo, same_sf_only, &mut rng::stream(seed, t as u64))).collect();
    let mean = losses.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    CollisionEstimate { success: 1.0 - mean, std_err: (var / trials as f64).sqrt(), trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorawan::topology::CellNode;

    fn node(channel: usize, sf: u8, airtime: f64, period: f64) -> CellNode {
        CellNode {
            position: [0.0, 0.0],
            distance_m: 1.0,
            area: 0,
            channel,
            sf,
            feasible: true,
            airtime_s: airtime,
            period_s: period,
            phase_s: 0.0,
        }
    }

    fn topo(nodes: Vec<CellNode>) -> CellTopology {
        CellTopology { gateway: [0.0, 0.0], d_gw: 500.0, channels: 8, area_centers: vec![[0.0, 0.0]], nodes }
    }

    /// Brute-force per-packet check straight from the overlap rule.
    fn brute(members: &[Member]) -> Vec<bool> {
        (0..members.len())
            .map(|x| {
                (0..members.len()).any(|y| {
                    y != x
                        && periodic_gap(members[x].t, members[y].t, members[y].period)
                            < (members[x].airtime + members[y].airtime) / 2.0
                })
            })
            .collect()
    }

    #[test]
    fn single_node_never_collides() {
        let e = collision_psr(&topo(vec![node(0, 7, 0.05, 300.0)]), 10, 1, false);
        assert_eq!(e.success, 1.0);
    }

    #[test]
    fn two_node_overlap_probability() {
        let a = 3.0;
        let dt = 300.0;
        let t = topo(vec![node(0, 10, a, dt), node(0, 10, a, dt)]);
        let e = collision_psr(&t, 40_000, 9, true);
        // Uniform offsets on a circle of length dt collide with probability 2a/dt.
        let expected = 1.0 - 2.0 * a / dt;
        assert!((e.success - expected).abs() < 3.0 * e.std_err.max(1e-4), "{} vs {expected}", e.success);
    }

    #[test]
    fn channels_and_sfs_separate() {
        let t = topo(vec![node(0, 10, 150.0, 300.0), node(1, 10, 150.0, 300.0)]);
        assert_eq!(collision_psr(&t, 50, 3, false).success, 1.0);
        let t = topo(vec![node(0, 9, 150.0, 300.0), node(0, 10, 150.0, 300.0)]);
        assert_eq!(collision_psr(&t, 50, 3, true).success, 1.0);
        assert!(collision_psr(&t, 50, 3, false).success < 1.0);
    }

    #[test]
    fn sweep_matches_brute_force() {
        let mut r = rng::stream(11, 0);
        for case in 0..200 {
            let n = 2 + case % 30;
            let period = if case % 3 == 0 { 60.0 } else { 300.0 };
            let mixed = case % 7 == 0;
            let mut members: Vec<Member> = (0..n)
                .map(|i| {
                    let p = if mixed && i % 2 == 0 { 2.0 * period } else { period };
                    Member { t: r.random_range(0.0..p), airtime: r.random_range(0.05..3.0), period: p }
                })
                .collect();
            let expected = brute(&members);
            let mut hit = vec![false; n];
            mark_group(&mut members, &mut hit);
            assert_eq!(hit, expected, "case {case}");
        }
    }

    #[test]
    fn reproducible_per_seed() {
        let nodes = (0..40).map(|i| node(i % 2, 8, 0.5, 120.0)).collect();
        let t = topo(nodes);
        assert_eq!(collision_psr(&t, 20, 5, false), collision_psr(&t, 20, 5, false));
    }
}
