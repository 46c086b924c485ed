//! Source-regressor dataset: steady-state foreground levels of one random
//! source, with every leave-one-out mask.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::io::{DatasetKind, DatasetMeta};
use super::scenario::random_source;
use super::split::{split_groups, Split};
use super::traces::{db_energy, energy_db, source_at_nodes, traffic_at_nodes};
use super::DatagenConfig;
use crate::acoustics::{PropagationConfig, Scene, NODES_PER_AREA};
use crate::dsp::foreground;
use crate::error::{Error, Result};
use crate::neural::{features, Samples, Tensor2};
use crate::rng;

/// Variants per trial: one unmasked, then one per held-out node.
pub const VARIANTS: usize = NODES_PER_AREA + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionRow {
    pub trial: u64,
    /// 0 = no node masked; `k` masks node `k - 1`.
    pub variant: u8,
    pub split: Split,
    /// Noisy foreground levels, 0 where masked.
    pub fg: [f64; NODES_PER_AREA],
    pub mask: [bool; NODES_PER_AREA],
    /// Gaussian draw added to each unmasked foreground value.
    pub noise: [f64; NODES_PER_AREA],
    pub x: f64,
    pub y: f64,
    pub level: f64,
}

impl RegressionRow {
    pub fn held_out(&self) -> Option<usize> {
        (self.variant > 0).then(|| usize::from(self.variant) - 1)
    }
}

#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub rows: Vec<RegressionRow>,
    pub meta: DatasetMeta,
}

/// Clean foreground per node for one source over steady traffic.
pub fn clean_foreground(traffic: &[f64], source: &[f64]) -> [f64; NODES_PER_AREA] {
    std::array::from_fn(|n| foreground(energy_db(db_energy(traffic[n]) + db_energy(source[n])), traffic[n]))
}

pub fn gen_regression_set(scene: &Scene, prop: &PropagationConfig, cfg: &DatagenConfig, seed: u64) -> Result<RegressionDataset> {
    cfg.validate()?;
    let traffic = traffic_at_nodes(scene, prop);
    let noise = Normal::new(0.0, cfg.feature_noise_db).map_err(|e| Error::invalid(e.to_string()))?;
    let trials = cfg.n_trials as u64;
    let groups: Vec<u64> = (0..trials).flat_map(|t| std::iter::repeat_n(t, VARIANTS)).collect();
    let (tags, _) = split_groups(&groups, cfg.test_fraction, cfg.validation_fraction, rng::derive(seed, 4))?;
    let mut rows = Vec::with_capacity(groups.len());
    for trial in 0..trials {
        let mut r = rng::stream(seed, trial);
        let level = r.random_range(cfg.level_min_db..=cfg.level_max_db);
        let src = random_source(scene, level, &mut r);
        let clean = clean_foreground(&traffic, &source_at_nodes(&src, scene, prop));
        for variant in 0..VARIANTS {
            let mask: [bool; NODES_PER_AREA] = std::array::from_fn(|n| variant != n + 1);
            let z: [f64; NODES_PER_AREA] = std::array::from_fn(|n| if mask[n] { noise.sample(&mut r) } else { 0.0 });
            let fg = std::array::from_fn(|n| if mask[n] { clean[n] + z[n] } else { 0.0 });
            rows.push(RegressionRow {
                trial,
                variant: variant as u8,
                split: tags[rows.len()],
                fg,
                mask,
                noise: z,
                x: src.x,
                y: src.y,
                level,
            });
        }
    }
    let mut meta = DatasetMeta::new(DatasetKind::Regression, seed, scene, cfg, prop, regression_columns());
    meta.fill_counts(rows.iter().map(|r| (r.trial, r.split)));
    Ok(RegressionDataset { rows, meta })
}

pub fn regression_columns() -> Vec<String> {
    let mut c: Vec<String> = ["trial", "variant", "split"].iter().map(|s| s.to_string()).collect();
    c.extend((0..NODES_PER_AREA).map(|i| format!("fg{i}")));
    c.extend((0..NODES_PER_AREA).map(|i| format!("m{i}")));
    c.extend((0..NODES_PER_AREA).map(|i| format!("z{i}")));
    c.extend(["x", "y", "level"].iter().map(|s| s.to_string()));
    c
}

/// Regressor features and targets of one split.
pub fn regression_samples(rows: &[RegressionRow], split: Split) -> Result<Samples> {
    let sel: Vec<&RegressionRow> = rows.iter().filter(|r| r.split == split).collect();
    let width = 2 * NODES_PER_AREA;
    if sel.is_empty() {
        return Ok(Samples { x: Tensor2::zeros(0, width), y: Tensor2::zeros(0, 3) });
    }
    let mut x = Vec::with_capacity(sel.len() * width);
    for r in &sel {
        x.extend(features(&r.fg, &r.mask)?);
    }
    let y = sel.iter().flat_map(|r| [r.x, r.y, r.level]).collect();
    Samples::new(Tensor2::from_vec(sel.len(), width, x)?, Tensor2::from_vec(sel.len(), 3, y)?)
}
