//! Simplified urban propagation engine: scenes, directional point sources,
//! propagation to receivers and rasters, and dB map algebra.

pub mod geometry;
pub mod propagate;
pub mod raster;
pub mod scene;
pub mod source;

pub use propagate::{propagate, traffic_sources, PropagationConfig};
pub use raster::{combine, render_cell, render_map, NoiseRaster, CELL_M, GRID};
pub use scene::{Scene, SceneFile, NODES_PER_AREA};
pub use source::{directivity, PointSource, BAND_COUNT, BAND_FREQUENCIES_HZ};
