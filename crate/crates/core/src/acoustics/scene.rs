use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::{distance, Point, Polygon};
use crate::error::{Error, Result};

pub const NODES_PER_AREA: usize = 9;
pub const AREA_EXTENT_M: f64 = 250.0;
pub const MIN_NODE_SPACING_M: f64 = 50.0;
pub const MAX_FACADE_DISTANCE_M: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Building {
    pub ring: Vec<Point>,
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_height() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Road {
    pub points: Vec<Point>,
    /// Vehicle point-source power, dB re 1 pW.
    #[serde(default = "default_road_power")]
    pub power_db: f64,
}

fn default_road_power() -> f64 {
    75.0
}

/// On-disk scene document. Geometry is in metres relative to `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    /// Easting, northing of the area's south-west corner, m.
    #[serde(default)]
    pub origin: Point,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_node_height")]
    pub node_height: f64,
    pub buildings: Vec<Building>,
    pub roads: Vec<Road>,
    pub nodes: Vec<Point>,
}

fn default_extent() -> f64 {
    AREA_EXTENT_M
}

fn default_node_height() -> f64 {
    2.0
}

/// A validated 250 m area with its nine sensor nodes.
#[derive(Debug, Clone)]
pub struct Scene {
    file: SceneFile,
    polygons: Vec<Polygon>,
}

impl Scene {
    pub fn new(file: SceneFile) -> Result<Self> {
        let polygons = file.buildings.iter().map(|b| Polygon::new(b.ring.clone())).collect();
        let scene = Self { file, polygons };
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SceneFile =
            serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_owned(), msg: e.to_string() })?;
        Self::new(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("scene serializes")
    }

    fn validate(&self) -> Result<()> {
        let f = &self.file;
        if f.extent <= 0.0 {
            return Err(Error::InvalidScene("extent must be positive".into()));
        }
        if f.nodes.len() != NODES_PER_AREA {
            return Err(Error::InvalidScene(format!("expected {NODES_PER_AREA} nodes, got {}", f.nodes.len())));
        }
        let inside = |p: &Point| p[0] >= 0.0 && p[0] <= f.extent && p[1] >= 0.0 && p[1] <= f.extent;
        for b in &f.buildings {
            if b.ring.len() < 3 || !b.ring.iter().all(inside) {
                return Err(Error::InvalidScene("building ring must have 3+ vertices inside the extent".into()));
            }
        }
        for r in &f.roads {
            if r.points.len() < 2 || !r.points.iter().all(inside) {
                return Err(Error::InvalidScene("road polyline must have 2+ points inside the extent".into()));
            }
        }
        for (i, n) in f.nodes.iter().enumerate() {
            if !inside(n) {
                return Err(Error::InvalidScene(format!("node {i} outside the extent")));
            }
            if self.polygons.iter().any(|p| p.contains(*n)) {
                return Err(Error::InvalidScene(format!("node {i} inside a building")));
            }
            let facade = self.polygons.iter().map(|p| p.boundary_distance(*n)).fold(f64::INFINITY, f64::min);
            if facade > MAX_FACADE_DISTANCE_M {
                return Err(Error::InvalidScene(format!("node {i} is {facade:.1} m from the nearest facade")));
            }
            for (j, m) in f.nodes.iter().enumerate().skip(i + 1) {
                if distance(*n, *m) < MIN_NODE_SPACING_M {
                    return Err(Error::InvalidScene(format!("nodes {i} and {j} closer than {MIN_NODE_SPACING_M} m")));
                }
            }
        }
        Ok(())
    }

    pub fn extent(&self) -> f64 {
        self.file.extent
    }

    pub fn origin(&self) -> Point {
        self.file.origin
    }

    pub fn nodes(&self) -> &[Point] {
        &self.file.nodes
    }

    pub fn roads(&self) -> &[Road] {
        &self.file.roads
    }

    pub fn buildings(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn file(&self) -> &SceneFile {
        &self.file
    }

    pub fn inside_building(&self, p: Point) -> bool {
        self.polygons.iter().any(|b| b.contains(p))
    }

    pub fn line_blocked(&self, a: Point, b: Point) -> bool {
        self.polygons.iter().any(|poly| poly.blocks(a, b))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(&self.file).expect("scene serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Node offsets from the area centre, used to replicate the layout
    /// across a gateway cell.
    pub fn node_offsets(&self) -> Vec<Point> {
        let c = self.file.extent / 2.0;
        self.file.nodes.iter().map(|n| [n[0] - c, n[1] - c]).collect()
    }

    /// Built-in urban block: two crossing roads, eight buildings, nine
    /// nodes at raster cell centres near facades.
    pub fn default_urban() -> Self {
        let rect = |x0: f64, y0: f64, x1: f64, y1: f64, h: f64| Building {
            ring: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            height: h,
        };
        let file = SceneFile {
            origin: [0.0, 0.0],
            extent: AREA_EXTENT_M,
            node_height: 2.0,
            buildings: vec![
                rect(20.0, 20.0, 60.0, 95.0, 18.0),
                rect(75.0, 20.0, 105.0, 60.0, 12.0),
                rect(145.0, 15.0, 200.0, 55.0, 15.0),
                rect(150.0, 75.0, 230.0, 105.0, 21.0),
                rect(15.0, 150.0, 100.0, 185.0, 24.0),
                rect(30.0, 200.0, 70.0, 240.0, 9.0),
                rect(150.0, 145.0, 185.0, 225.0, 30.0),
                rect(200.0, 150.0, 240.0, 200.0, 12.0),
            ],
            roads: vec![
                Road { points: vec![[0.0, 125.0], [250.0, 125.0]], power_db: 75.0 },
                Road { points: vec![[125.0, 0.0], [125.0, 250.0]], power_db: 72.0 },
            ],
            nodes: vec![
                [67.5, 57.5],
                [112.5, 22.5],
                [172.5, 67.5],
                [237.5, 92.5],
                [107.5, 167.5],
                [22.5, 192.5],
                [82.5, 222.5],
                [192.5, 232.5],
                [192.5, 177.5],
            ],
        };
        Self::new(file).expect("built-in scene is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_is_valid_and_round_trips() {
        let s = Scene::default_urban();
        let again = Scene::from_json(&s.to_json()).unwrap();
        assert_eq!(s.hash(), again.hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn rejects_constraint_violations() {
        let mut f = Scene::default_urban().file().clone();
        f.nodes[1] = [f.nodes[0][0] + 10.0, f.nodes[0][1]];
        assert!(matches!(Scene::new(f), Err(Error::InvalidScene(_))));

        let mut f = Scene::default_urban().file().clone();
        f.nodes.pop();
        assert!(Scene::new(f).is_err());

        let mut f = Scene::default_urban().file().clone();
        f.nodes[0] = [40.0, 50.0];
        assert!(Scene::new(f).is_err(), "node inside building");

        let mut f = Scene::default_urban().file().clone();
        f.roads[0].points[1] = [300.0, 125.0];
        assert!(Scene::new(f).is_err());
    }

    #[test]
    fn far_from_facade_rejected() {
        let mut f = Scene::default_urban().file().clone();
        f.buildings.clear();
        f.buildings.push(Building { ring: vec![[0.0, 0.0], [5.0, 0.0], [5.0, 5.0]], height: 5.0 });
        assert!(Scene::new(f).is_err());
    }
}
