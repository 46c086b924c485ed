//! Run configuration, read from TOML. Every section and field is optional;
//! missing values take the library defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acoustics::PropagationConfig;
use crate::datagen::DatagenConfig;
use crate::dsp::{KfParams, SplMeterConfig};
use crate::error::{Error, Result};
use crate::lorawan::ChannelConfig;
use crate::neural::TrainConfig;
use crate::pipeline::ReplayConfig;

/// Per-model training knobs on top of the shared loop settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralConfig {
    pub classifier: TrainConfig,
    pub regressor: TrainConfig,
    /// Weight of the positive class in the classifier loss. Values below 1
    /// trade recall for precision.
    pub pos_weight: f64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        Self { classifier: TrainConfig { patience: 20, ..TrainConfig::default() }, regressor: TrainConfig::default(), pos_weight: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub meter: SplMeterConfig,
    pub kf: KfParams,
    pub propagation: PropagationConfig,
    pub channel: ChannelConfig,
    pub datagen: DatagenConfig,
    pub neural: NeuralConfig,
    pub replay: ReplayConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_owned(), msg: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `path` if given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn validate(&self) -> Result<()> {
        self.meter.validate()?;
        self.kf.validate()?;
        self.channel.validate()?;
        self.datagen.validate()?;
        self.replay.validate()?;
        if !(self.neural.pos_weight > 0.0) {
            return Err(Error::invalid("pos_weight must be positive"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
