//! Run configuration as a TOML document.
//!
//! ```toml
//! [simulate]
//! model = "connectivity"
//! [simulate.recipe]
//! signal_noise_ratio = 2.0
//!
//! [data]
//! path = "out/data.csv"
//!
//! [mcmc]
//! n_iter = 2000
//! burn_in = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::DEFAULT_DETREND_K;
use crate::sampler::{McmcConfig, PriorSettings, StatePrecision};
use crate::sim::{SimRecipe, UnivariateRecipe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SimModel {
    #[default]
    Connectivity,
    Univariate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub model: SimModel,
    pub recipe: SimRecipe,
    pub univariate: UnivariateRecipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// Dataset to fit; required by `fit`.
    pub path: Option<PathBuf>,
    pub sampling_interval: f64,
    /// Running-line neighbourhood; no detrending when absent.
    pub detrend_k: Option<usize>,
    pub standardize: bool,
    /// Static trend per series.
    pub include_trend: bool,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            path: None,
            sampling_interval: 2.0,
            detrend_k: Some(DEFAULT_DETREND_K),
            standardize: true,
            include_trend: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub simulate: SimulateSection,
    pub data: DataSection,
    pub priors: PriorSettings,
    pub state_precision: StatePrecision,
    pub mcmc: McmcConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            simulate: SimulateSection::default(),
            data: DataSection::default(),
            priors: PriorSettings::default(),
            state_precision: StatePrecision::Hierarchical,
            mcmc: McmcConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}
