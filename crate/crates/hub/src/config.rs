use std::path::{Path, PathBuf};

use cbrne_core::scenario::{load_strict, parse_strict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::HubError;

/// Environment variable naming a hub config file.
pub const CONFIG_ENV: &str = "HUB_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubConfig {
    #[serde(default = "default_model")]
    pub model: PathBuf,
    /// Directory of plain-text documents.
    #[serde(default = "default_corpus")]
    pub corpus: PathBuf,
    #[serde(default = "default_synonyms")]
    pub synonyms: PathBuf,
    /// A dose reading counts as positive above this multiple of background.
    #[serde(default = "default_factor")]
    pub radiation_threshold_factor: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Event log file; in memory only when absent.
    #[serde(default)]
    pub log: Option<PathBuf>,
}

fn default_model() -> PathBuf {
    PathBuf::from("models/default_cbrne.model")
}

fn default_corpus() -> PathBuf {
    PathBuf::from("corpus")
}

fn default_synonyms() -> PathBuf {
    PathBuf::from("synonyms.json")
}

fn default_factor() -> f64 {
    3.0
}

fn default_top_k() -> usize {
    10
}

impl Default for HubConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            corpus: default_corpus(),
            synonyms: default_synonyms(),
            radiation_threshold_factor: default_factor(),
            top_k: default_top_k(),
            log: None,
        }
    }
}

impl HubConfig {
    /// Reads an inline config object; relative paths resolve against `base`.
    pub fn from_value(value: &Value, base: &Path) -> Result<Self, HubError> {
        let config: Self = match value {
            Value::Null => Self::default(),
            other => parse_strict(&other.to_string())?,
        };
        config.resolved(base)
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HubError> {
        let config: Self = load_strict(path)?;
        config.resolved(path.parent().unwrap_or(Path::new(".")))
    }

    /// The file named by `override_path` if given, else the scenario's inline section.
    pub fn select(inline: &Value, scenario_dir: &Path, override_path: Option<&Path>) -> Result<Self, HubError> {
        match override_path {
            Some(path) => Self::load(path),
            None => Self::from_value(inline, scenario_dir),
        }
    }

    fn resolved(mut self, base: &Path) -> Result<Self, HubError> {
        if !(self.radiation_threshold_factor.is_finite() && self.radiation_threshold_factor > 0.0) {
            return Err(HubError::Setup("radiation_threshold_factor must be positive".into()));
        }
        if self.top_k == 0 {
            return Err(HubError::Setup("top_k must be at least 1".into()));
        }
        let join = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        self.model = join(&self.model);
        self.corpus = join(&self.corpus);
        self.synonyms = join(&self.synonyms);
        self.log = self.log.as_ref().map(join);
        Ok(self)
    }
}
