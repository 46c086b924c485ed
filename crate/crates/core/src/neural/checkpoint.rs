//! Self-describing JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::models::{EventClassifier, Network, SourceRegressor};
use super::train::TrainReport;
use crate::error::{Error, Result};

pub const FORMAT: &str = "noisemap-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Classifier(EventClassifier),
    Regressor(SourceRegressor),
}

impl Model {
    fn shapes(&self) -> Vec<(usize, usize)> {
        match self {
            Model::Classifier(m) => m.params().iter().map(|p| p.shape()).collect(),
            Model::Regressor(m) => m.params().iter().map(|p| p.shape()).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let params = match self {
            Model::Classifier(m) => {
                m.validate()?;
                m.params()
            }
            Model::Regressor(m) => {
                m.validate()?;
                m.params()
            }
        };
        if params.iter().any(|p| p.len() != p.rows() * p.cols() || !p.all_finite()) {
            return Err(Error::Checkpoint("parameter values are inconsistent".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Training seed.
    pub seed: u64,
    /// Free-form provenance, e.g. the dataset file and its metadata hash.
    pub lineage: String,
    /// Node index order fed to the model.
    pub node_order: Vec<usize>,
    /// Parameter shapes in gradient order.
    pub shapes: Vec<(usize, usize)>,
    pub report: Option<TrainReport>,
    pub model: Model,
}

impl Checkpoint {
    pub fn new(model: Model, seed: u64, lineage: impl Into<String>, report: Option<TrainReport>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            seed,
            lineage: lineage.into(),
            node_order: (0..crate::acoustics::NODES_PER_AREA).collect(),
            shapes: model.shapes(),
            report,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        if c.format != FORMAT || c.version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported model file {} v{}", c.format, c.version)));
        }
        if c.shapes != c.model.shapes() {
            return Err(Error::Checkpoint("recorded shapes do not match the parameters".into()));
        }
        c.model.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })
    }

    pub fn classifier(&self) -> Result<&EventClassifier> {
        match &self.model {
            Model::Classifier(m) => Ok(m),
            Model::Regressor(_) => Err(Error::Checkpoint("expected a classifier".into())),
        }
    }

    pub fn regressor(&self) -> Result<&SourceRegressor> {
        match &self.model {
            Model::Regressor(m) => Ok(m),
            Model::Classifier(_) => Err(Error::Checkpoint("expected a regressor".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor2;

    #[test]
    fn round_trip_keeps_predictions() {
        let c = EventClassifier::with_units(7, 3);
        let r = SourceRegressor::with_sizes(11, 5, 3);
        let x = [1.5, -2.0, 0.0, 4.0, 0.3, 0.0, -0.1, 9.0, 2.0];
        let ck = Checkpoint::new(Model::Classifier(c.clone()), 3, "test", None);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back.classifier().unwrap().predict_event(&x).unwrap(), c.predict_event(&x).unwrap());
        let mask = [true, true, false, true, true, true, true, true, true];
        let ck = Checkpoint::new(Model::Regressor(r.clone()), 3, "test", None);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back.regressor().unwrap().predict_source(&x, &mask).unwrap(), r.predict_source(&x, &mask).unwrap());
        assert!(back.classifier().is_err());
    }

    #[test]
    fn rejects_tampered_shapes() {
        let mut ck = Checkpoint::new(Model::Classifier(EventClassifier::with_units(3, 1)), 1, "", None);
        ck.shapes[0] = (9, 9);
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
        let mut ck = Checkpoint::new(Model::Classifier(EventClassifier::with_units(3, 1)), 1, "", None);
        if let Model::Classifier(m) = &mut ck.model {
            m.head.w = Tensor2::zeros(2, 2);
        }
        ck.shapes = ck.model.shapes();
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
    }
}
