//! Dataset CSV files and their JSON metadata sidecars.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::events::{events_columns, EventRow};
use super::regression::{regression_columns, RegressionRow};
use super::split::Split;
use super::DatagenConfig;
use crate::acoustics::{PropagationConfig, Scene, NODES_PER_AREA};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Event,
    Regression,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: DatasetKind,
    pub format_version: u32,
    pub seed: u64,
    pub scene_hash: String,
    pub rows: usize,
    pub groups: usize,
    pub split_counts: SplitCounts,
    pub split_rule: String,
    pub positive_rate: Option<f64>,
    pub active_fraction: Option<f64>,
    pub rejected_sources: Option<usize>,
    pub test_view_psr: Option<f64>,
    pub params: DatagenConfig,
    pub propagation: PropagationConfig,
    pub columns: Vec<String>,
}

impl DatasetMeta {
    pub fn new(
        kind: DatasetKind,
        seed: u64,
        scene: &Scene,
        cfg: &DatagenConfig,
        prop: &PropagationConfig,
        columns: Vec<String>,
    ) -> Self {
        Self {
            kind,
            format_version: FORMAT_VERSION,
            seed,
            scene_hash: scene.hash(),
            rows: 0,
            groups: 0,
            split_counts: SplitCounts::default(),
            split_rule: format!(
                "{:.0}% of groups held out for test, then {:.0}/{:.0} train/validation of the rest",
                cfg.test_fraction * 100.0,
                (1.0 - cfg.validation_fraction) * 100.0,
                cfg.validation_fraction * 100.0
            ),
            positive_rate: None,
            active_fraction: None,
            rejected_sources: None,
            test_view_psr: None,
            params: cfg.clone(),
            propagation: *prop,
            columns,
        }
    }

    pub(crate) fn fill_counts(&mut self, rows: impl Iterator<Item = (u64, Split)>) {
        let mut groups = BTreeSet::new();
        let mut c = SplitCounts::default();
        let mut n = 0;
        for (g, s) in rows {
            groups.insert(g);
            n += 1;
            match s {
                Split::Train => c.train += 1,
                Split::Validation => c.validation += 1,
                Split::Test => c.test += 1,
            }
        }
        self.rows = n;
        self.groups = groups.len();
        self.split_counts = c;
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_meta(csv: &Path, meta: &DatasetMeta) -> Result<()> {
    std::fs::write(sidecar_path(csv), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

pub fn read_meta(csv: &Path) -> Result<DatasetMeta> {
    let p = sidecar_path(csv);
    let text = std::fs::read_to_string(&p)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: p, msg: e.to_string() })
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub fn write_events(path: &Path, rows: &[EventRow], meta: &DatasetMeta) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(events_columns())?;
    for r in rows {
        let mut rec = vec![num(r.tick_s), r.group.to_string(), r.split.as_str().into(), num(r.view_dt_s)];
        rec.extend(r.delta.iter().map(|v| num(*v)));
        rec.push(u8::from(r.label).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_meta(path, meta)
}

pub fn write_regression(path: &Path, rows: &[RegressionRow], meta: &DatasetMeta) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(regression_columns())?;
    for r in rows {
        let mut rec = vec![r.trial.to_string(), r.variant.to_string(), r.split.as_str().into()];
        rec.extend(r.fg.iter().map(|v| num(*v)));
        rec.extend(r.mask.iter().map(|m| u8::from(*m).to_string()));
        rec.extend(r.noise.iter().map(|v| num(*v)));
        rec.extend([num(r.x), num(r.y), num(r.level)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_meta(path, meta)
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    path: &'a Path,
    line: u64,
}

impl Fields<'_> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { path: self.path.to_path_buf(), msg: format!("line {}: {msg}", self.line) }
    }

    fn f64(&self, i: usize) -> Result<f64> {
        let s = self.rec.get(i).ok_or_else(|| self.err(format!("missing column {i}")))?;
        let v: f64 = s.parse().map_err(|_| self.err(format!("bad number {s:?}")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite value {s:?}")));
        }
        Ok(v)
    }

    fn u64(&self, i: usize) -> Result<u64> {
        let s = self.rec.get(i).ok_or_else(|| self.err(format!("missing column {i}")))?;
        s.parse().map_err(|_| self.err(format!("bad integer {s:?}")))
    }

    fn bit(&self, i: usize) -> Result<bool> {
        match self.u64(i)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(self.err(format!("expected 0 or 1, got {v}"))),
        }
    }

    fn split(&self, i: usize) -> Result<Split> {
        let s = self.rec.get(i).unwrap_or("");
        Split::parse(s).ok_or_else(|| self.err(format!("bad split {s:?}")))
    }
}

fn read_rows<T>(path: &Path, columns: &[String], mut f: impl FnMut(&Fields) -> Result<T>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != columns {
        return Err(Error::Parse { path: path.to_path_buf(), msg: "unexpected header".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(f(&Fields { rec: &rec, path, line: i as u64 + 2 })?);
    }
    Ok(out)
}

pub fn read_events(path: &Path) -> Result<Vec<EventRow>> {
    read_rows(path, &events_columns(), |f| {
        Ok(EventRow {
            tick_s: f.f64(0)?,
            group: f.u64(1)?,
            split: f.split(2)?,
            view_dt_s: f.f64(3)?,
            delta: std::array::from_fn(|i| f.f64(4 + i).unwrap_or(f64::NAN)),
            label: f.bit(4 + NODES_PER_AREA)?,
        })
    })
    .and_then(|rows| {
        if rows.iter().any(|r| r.delta.iter().any(|v| v.is_nan())) {
            return Err(Error::Parse { path: path.to_path_buf(), msg: "bad ΔL_Aeq value".into() });
        }
        Ok(rows)
    })
}

pub fn read_regression(path: &Path) -> Result<Vec<RegressionRow>> {
    let n = NODES_PER_AREA;
    let rows = read_rows(path, &regression_columns(), |f| {
        let mut mask = [true; NODES_PER_AREA];
        for (i, m) in mask.iter_mut().enumerate() {
            *m = f.bit(3 + n + i)?;
        }
        let mut fg = [0.0; NODES_PER_AREA];
        let mut noise = [0.0; NODES_PER_AREA];
        for i in 0..n {
            fg[i] = f.f64(3 + i)?;
            noise[i] = f.f64(3 + 2 * n + i)?;
        }
        Ok(RegressionRow {
            trial: f.u64(0)?,
            variant: f.u64(1)? as u8,
            split: f.split(2)?,
            fg,
            mask,
            noise,
            x: f.f64(3 + 3 * n)?,
            y: f.f64(4 + 3 * n)?,
            level: f.f64(5 + 3 * n)?,
        })
    })?;
    Ok(rows)
}
