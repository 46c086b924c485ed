//! Correction grid over gateway range and uplink interval.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::replay::{ErrorReport, SUMMARY_COLUMNS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionCell {
    pub d_gw: f64,
    pub dt_s: f64,
    /// Fraction in `[-1, 1]`; printed as percent.
    pub correction: f64,
    pub baseline_correction: f64,
}

/// Cells sorted by range then interval, with the distinct axis values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionGrid {
    pub d_gws: Vec<f64>,
    pub dts: Vec<f64>,
    /// `[range][interval]`; NaN where a cell is missing.
    pub values: Vec<Vec<f64>>,
}

pub fn correction_summary(reports: &[ErrorReport]) -> Vec<CorrectionCell> {
    let mut cells: Vec<CorrectionCell> = reports
        .iter()
        .map(|r| CorrectionCell { d_gw: r.d_gw, dt_s: r.dt_s, correction: r.correction, baseline_correction: r.baseline_correction })
        .collect();
    cells.sort_by(|a, b| a.d_gw.total_cmp(&b.d_gw).then(a.dt_s.total_cmp(&b.dt_s)));
    cells
}

/// Reads the rows written by [`super::replay::write_summary_csv`].
pub fn read_summary_csv<R: Read>(input: R, path: &Path) -> Result<Vec<CorrectionCell>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != SUMMARY_COLUMNS {
        return Err(Error::Parse { path: path.to_owned(), msg: format!("unexpected header {header:?}") });
    }
    let col = |name: &str| SUMMARY_COLUMNS.iter().position(|c| *c == name).expect("known column");
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |name: &str| -> Result<f64> {
            rec[col(name)].parse().map_err(|e| Error::Parse { path: path.to_owned(), msg: format!("{name}: {e}") })
        };
        out.push(CorrectionCell {
            d_gw: num("d_gw")?,
            dt_s: num("dt")?,
            correction: num("correction")?,
            baseline_correction: num("baseline_correction")?,
        });
    }
    Ok(out)
}

impl CorrectionGrid {
    pub fn from_cells(cells: &[CorrectionCell]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Empty("correction cells"));
        }
        let axis = |f: fn(&CorrectionCell) -> f64| {
            let mut v: Vec<f64> = cells.iter().map(f).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let d_gws = axis(|c| c.d_gw);
        let dts = axis(|c| c.dt_s);
        let mut values = vec![vec![f64::NAN; dts.len()]; d_gws.len()];
        for c in cells {
            let i = d_gws.iter().position(|d| *d == c.d_gw).expect("axis value");
            let j = dts.iter().position(|d| *d == c.dt_s).expect("axis value");
            if !values[i][j].is_nan() {
                return Err(Error::invalid(format!("duplicate cell ({}, {})", c.d_gw, c.dt_s)));
            }
            values[i][j] = c.correction;
        }
        Ok(Self { d_gws, dts, values })
    }

    /// True if correction never increases with range or with interval.
    pub fn is_monotone(&self) -> bool {
        let v = &self.values;
        let rows_ok = v.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0]));
        let cols_ok = (0..self.dts.len()).all(|j| v.windows(2).all(|w| w[1][j] <= w[0][j]));
        rows_ok && cols_ok
    }

    pub fn best(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_finite() && best.is_none_or(|b| *v > b.2) {
                    best = Some((self.d_gws[i], self.dts[j], *v));
                }
            }
        }
        best
    }

    /// Range per row, one percent column per interval.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["d_gw".to_string()];
        header.extend(self.dts.iter().map(|d| format!("dt_{d:.0}")));
        w.write_record(&header)?;
        for (d, row) in self.d_gws.iter().zip(&self.values) {
            let mut rec = vec![format!("{d:.0}")];
            rec.extend(row.iter().map(|v| if v.is_finite() { format!("{:.2}", 100.0 * v) } else { String::new() }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Grouped bar chart: one group per range, one bar per interval.
    pub fn to_svg(&self) -> String {
        let (w, h, left, bottom, top) = (640.0, 360.0, 60.0, 50.0, 30.0);
        let plot_h = h - bottom - top;
        let group_w = (w - left - 20.0) / self.d_gws.len().max(1) as f64;
        let bar_w = group_w * 0.8 / self.dts.len().max(1) as f64;
        let shades = ["#1f4e79", "#4a90c2", "#a9cce3", "#d6eaf8"];
        let y_of = |pct: f64| top + plot_h * (1.0 - pct.clamp(0.0, 100.0) / 100.0);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        for pct in (0..=100).step_by(20) {
            let y = y_of(pct as f64);
            let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, w - 20.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{pct}%</text>"#, left - 6.0, y + 4.0);
        }
        for (i, (d, row)) in self.d_gws.iter().zip(&self.values).enumerate() {
            let x0 = left + i as f64 * group_w + group_w * 0.1;
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    continue;
                }
                let pct = 100.0 * v;
                let (x, y) = (x0 + j as f64 * bar_w, y_of(pct));
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{d:.0} m, {:.0} s: {pct:.1}%</title></rect>"#,
                    bar_w * 0.95,
                    (top + plot_h - y).max(0.0),
                    shades[j % shades.len()],
                    self.dts[j]
                );
            }
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{d:.0} m</text>"#, x0 + group_w * 0.4, h - bottom + 18.0);
        }
        for (j, dt) in self.dts.iter().enumerate() {
            let x = left + 10.0 + j as f64 * 110.0;
            let _ = writeln!(s, r#"<rect x="{x:.1}" y="8" width="12" height="12" fill="{}"/>"#, shades[j % shades.len()]);
            let _ = writeln!(s, r#"<text x="{:.1}" y="18">{:.0} min</text>"#, x + 16.0, dt / 60.0);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">gateway range</text>"#, left + (w - left) / 2.0, h - 10.0);
        s.push_str("</svg>\n");
        s
    }
}
