use std::io::Write;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::collision::collision_psr;
use super::link::{link_quality_psr, LinkBudget};
use super::phy::RadioParams;
use super::topology::{CellTopology, DEFAULT_CHANNELS};
use crate::acoustics::geometry::Point;
use crate::acoustics::scene::NODES_PER_AREA;
use crate::error::{Error, Result};
use crate::rng;

const SHADOWING_LABEL: u64 = 0x5AD0;
const COLLISION_LABEL: u64 = 0xC011;
const PHASE_LABEL: u64 = 0x9A5E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub radio: RadioParams,
    pub budget: LinkBudget,
    pub channels: usize,
    /// Only packets sharing both channel and SF collide.
    pub collision_same_sf_only: bool,
    /// Shadowing draws per link for the link-quality average.
    pub shadowing_draws: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            radio: RadioParams::default(),
            budget: LinkBudget::default(),
            channels: DEFAULT_CHANNELS,
            collision_same_sf_only: false,
            shadowing_draws: 2000,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.budget.validate()?;
        if self.channels == 0 || self.shadowing_draws == 0 {
            return Err(Error::invalid("channels and shadowing_draws must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellPsr {
    pub d_gw: f64,
    pub dt_s: f64,
    pub r_s_c: f64,
    pub r_s_c_std_err: f64,
    pub r_s_q: f64,
    pub r_s_cell: f64,
    pub packets_per_area_hour: f64,
}

/// Mean link-quality success rate over all links of the cell and
/// `draws` shadowing draws per link. Does not depend on the period.
pub fn link_quality_mean(topo: &CellTopology, cfg: &ChannelConfig, draws: usize, seed: u64) -> Result<f64> {
    let normal = Normal::new(0.0, cfg.budget.shadowing_sigma_db).map_err(|e| Error::invalid(e.to_string()))?;
    let draws = draws.max(1);
    let mut total = 0.0;
    for (i, node) in topo.nodes.iter().enumerate() {
        let radio = cfg.radio.with_sf(node.sf);
        let mut r = rng::stream(rng::derive(seed, SHADOWING_LABEL), i as u64);
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += link_quality_psr(node.distance_m, &radio, &cfg.budget, normal.sample(&mut r))?;
        }
        total += acc / draws as f64;
    }
    Ok(if topo.nodes.is_empty() { 1.0 } else { total / topo.nodes.len() as f64 })
}

pub fn cell_psr(topo: &CellTopology, cfg: &ChannelConfig, trials: usize, seed: u64) -> Result<CellPsr> {
    cfg.validate()?;
    let dt_s = topo.nodes.first().map_or(0.0, |n| n.period_s);
    let r_s_q = link_quality_mean(topo, cfg, cfg.shadowing_draws, seed)?;
    combine(topo, cfg, trials, seed, r_s_q, dt_s)
}

fn combine(topo: &CellTopology, cfg: &ChannelConfig, trials: usize, seed: u64, r_s_q: f64, dt_s: f64) -> Result<CellPsr> {
    let c = collision_psr(topo, trials, rng::derive(seed, COLLISION_LABEL ^ dt_s.to_bits()), cfg.collision_same_sf_only);
    let r_s_cell = c.success * r_s_q;
    Ok(CellPsr {
        d_gw: topo.d_gw,
        dt_s,
        r_s_c: c.success,
        r_s_c_std_err: c.std_err,
        r_s_q,
        r_s_cell,
        packets_per_area_hour: packets_per_area_hour(dt_s, r_s_cell),
    })
}

pub fn packets_per_area_hour(dt_s: f64, r_s_cell: f64) -> f64 {
    NODES_PER_AREA as f64 * 3600.0 / dt_s * r_s_cell
}

/// Evaluates every `(d_gw, dt)` pair. The link-quality factor is computed
/// once per distance and shared across periods.
pub fn channel_sweep(
    node_offsets: &[Point],
    d_gws: &[f64],
    dts: &[f64],
    trials: usize,
    seed: u64,
    cfg: &ChannelConfig,
) -> Result<Vec<CellPsr>> {
    cfg.validate()?;
    if dts.iter().any(|dt| !(*dt > 0.0)) || d_gws.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid("sweep distances and periods must be positive"));
    }
    let mut rows = Vec::with_capacity(d_gws.len() * dts.len());
    for &d_gw in d_gws {
        let mut prng = rng::stream(rng::derive(seed, PHASE_LABEL), d_gw.to_bits());
        let base = CellTopology::build(node_offsets, d_gw, 1.0, &cfg.radio, &cfg.budget, cfg.channels, &mut prng)?;
        let r_s_q = link_quality_mean(&base, cfg, cfg.shadowing_draws, seed)?;
        for &dt in dts {
            let topo = base.with_period(dt);
            rows.push(combine(&topo, cfg, trials, rng::derive(seed, d_gw.to_bits()), r_s_q, dt)?);
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[CellPsr], mut out: W) -> Result<()> {
    writeln!(out, "d_gw,dt,r_s_c,r_s_q,r_s_cell,packets_per_area_hour")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.4},{:.4},{:.4},{:.2}",
            r.d_gw, r.dt_s, r.r_s_c, r.r_s_q, r.r_s_cell, r.packets_per_area_hour
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offsets() -> Vec<Point> {
        crate::acoustics::Scene::default_urban().node_offsets()
    }

    #[test]
    fn product_is_exact_and_link_quality_ignores_period() {
        let rows = channel_sweep(&offsets(), &[1000.0], &[300.0, 900.0], 30, 4, &ChannelConfig::default()).unwrap();
        for r in &rows {
            assert_eq!(r.r_s_cell, r.r_s_c * r.r_s_q);
            assert!((r.packets_per_area_hour - 9.0 * 3600.0 / r.dt_s * r.r_s_cell).abs() < 1e-12);
        }
        assert_eq!(rows[0].r_s_q, rows[1].r_s_q);
        assert!(rows[0].r_s_c <= rows[1].r_s_c + 2.0 * rows[1].r_s_c_std_err);
    }

    #[test]
    fn perfect_factors_give_full_rate() {
        assert_eq!(packets_per_area_hour(300.0, 1.0 * 1.0), 108.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = channel_sweep(&offsets(), &[500.0], &[600.0], 5, 1, &ChannelConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.starts_with("d_gw,dt,r_s_c,r_s_q,r_s_cell,packets_per_area_hour"));
    }

    #[test]
    fn rejects_bad_sweep() {
        assert!(channel_sweep(&offsets(), &[500.0], &[0.0], 5, 1, &ChannelConfig::default()).is_err());
    }
}
