//! 50 x 50 level grids over the 250 m area.
//!
//! Row 0 is the southernmost row and column 0 the westernmost. Cells whose
//! centre falls inside a building hold NaN (no data). Exports are written
//! north-up.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::propagate::{received_energy, PropagationConfig};
use super::scene::Scene;
use super::source::PointSource;
use crate::error::{Error, Result};

pub const GRID: usize = 50;
pub const CELL_M: f64 = 5.0;

pub const PGM_MIN_DB: f64 = 30.0;
pub const PGM_MAX_DB: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRaster {
    origin: Point,
    cell: f64,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl NoiseRaster {
    pub fn filled(origin: Point, value: f64) -> Self {
        Self { origin, cell: CELL_M, rows: GRID, cols: GRID, values: vec![value; GRID * GRID] }
    }

    pub fn from_values(origin: Point, values: Vec<f64>) -> Result<Self> {
        if values.len() != GRID * GRID {
            return Err(Error::ShapeMismatch(format!("expected {} values, got {}", GRID * GRID, values.len())));
        }
        Ok(Self { origin, cell: CELL_M, rows: GRID, cols: GRID, values })
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn cell_center(row: usize, col: usize) -> Point {
        [(col as f64 + 0.5) * CELL_M, (row as f64 + 0.5) * CELL_M]
    }

    /// Cell holding local position `pos`. Points on a shared edge go to the
    /// lower index.
    pub fn cell_of(&self, pos: Point) -> Result<(usize, usize)> {
        let extent = self.cell * self.rows as f64;
        let oob = || Error::OutOfBounds { x: pos[0], y: pos[1] };
        let index = |v: f64| -> Result<usize> {
            if !(0.0..=extent).contains(&v) {
                return Err(oob());
            }
            Ok(((v / self.cell).ceil() as usize).saturating_sub(1).min(self.rows - 1))
        };
        Ok((index(pos[1])?, index(pos[0])?))
    }

    /// Nearest-neighbour value at local position `pos`.
    pub fn sample_at(&self, pos: Point) -> Result<f64> {
        let (r, c) = self.cell_of(pos)?;
        Ok(self.get(r, c))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() || self.origin != other.origin || self.cell != other.cell {
            return Err(Error::ShapeMismatch(format!(
                "{:?}@{:?} vs {:?}@{:?}",
                self.shape(),
                self.origin,
                other.shape(),
                other.origin
            )));
        }
        Ok(())
    }

    /// Mean of the finite cells.
    pub fn mean_db(&self) -> f64 {
        let (s, n) = self.values.iter().filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            s / n as f64
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).map(|v| 10f64.powf(v / 10.0)).sum()
    }

    pub fn max_cell(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if v.is_finite() && best.is_none_or(|(_, b)| *v > b) {
                best = Some((i, *v));
            }
        }
        best.map(|(i, _)| (i / self.cols, i % self.cols))
    }

    /// ASCII PGM (P2), 30-100 dB mapped linearly onto 0-255, north-up.
    /// No-data cells are written as 0.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n# noise raster, {PGM_MIN_DB}-{PGM_MAX_DB} dB\n{} {}\n255\n", self.cols, self.rows);
        for r in (0..self.rows).rev() {
            let line: Vec<String> = (0..self.cols)
                .map(|c| {
                    let v = self.get(r, c);
                    if v.is_finite() {
                        let t = ((v - PGM_MIN_DB) / (PGM_MAX_DB - PGM_MIN_DB)).clamp(0.0, 1.0);
                        ((t * 255.0).round() as u8).to_string()
                    } else {
                        "0".to_string()
                    }
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Row-major dB values, north-up, 4 decimals; no-data cells are `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 9);
        for r in (0..self.rows).rev() {
            for c in 0..self.cols {
                if c > 0 {
                    out.push(',');
                }
                let v = self.get(r, c);
                if v.is_finite() {
                    let _ = write!(out, "{v:.4}");
                } else {
                    out.push_str("nan");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_pgm())?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }
}

fn energy_to_db(e: f64, floor: f64) -> f64 {
    if e > 0.0 {
        (10.0 * e.log10()).max(floor)
    } else {
        floor
    }
}

/// Level in one raster cell from `sources`; NaN inside buildings.
pub fn render_cell(sources: &[PointSource], scene: &Scene, cfg: &PropagationConfig, row: usize, col: usize) -> f64 {
    let c = NoiseRaster::cell_center(row, col);
    if scene.inside_building(c) {
        return f64::NAN;
    }
    energy_to_db(sources.iter().map(|s| received_energy(s, scene, c, cfg)).sum(), cfg.floor_db)
}

/// Energetic sum of every source at every cell centre, floored.
pub fn render_map(sources: &[PointSource], scene: &Scene, cfg: &PropagationConfig) -> NoiseRaster {
    let values = (0..GRID * GRID).map(|i| render_cell(sources, scene, cfg, i / GRID, i % GRID)).collect();
    NoiseRaster { origin: scene.origin(), cell: CELL_M, rows: GRID, cols: GRID, values }
}

/// Cellwise energetic sum.
pub fn combine(maps: &[&NoiseRaster]) -> Result<NoiseRaster> {
    let (first, rest) = maps.split_first().ok_or(Error::Empty("raster list"))?;
    for m in rest {
        first.check_compatible(m)?;
    }
    if rest.is_empty() {
        return Ok((*first).clone());
    }
    let values = (0..first.values.len())
        .map(|i| {
            let e: f64 = maps.iter().map(|m| 10f64.powf(m.values[i] / 10.0)).sum();
            10.0 * e.log10()
        })
        .collect();
    Ok(NoiseRaster { values, ..(*first).clone() })
}
