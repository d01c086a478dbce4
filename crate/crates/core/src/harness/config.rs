use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityOptions, Metric, MetricSet};
use crate::error::{Error, Result};
use crate::features::{RankTies, DEFAULT_DELTA};
use crate::gcn::{BetaSchedule, ModelConfig, StopOn, Variant};
use crate::sir::{DatasetConfig, SirConfig};

/// Which centralities become node features.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureMode {
    /// Local metrics chosen through the feature network.
    #[default]
    FnSelected,
    AllLocal,
    AllGlobal,
    All,
    /// Degree, betweenness, closeness, and clustering coefficient.
    InfGcn4,
    Explicit(Vec<Metric>),
    /// The feature-network selection minus one metric.
    LeaveOneOut(Metric),
}

pub const INFGCN_FEATURES: [Metric; 4] = [Metric::Degree, Metric::Betweenness, Metric::Closeness, Metric::Lcc];

impl FeatureMode {
    /// Centralities that must be computed before features can be resolved.
    pub fn required(&self) -> MetricSet {
        match self {
            FeatureMode::FnSelected | FeatureMode::LeaveOneOut(_) | FeatureMode::AllLocal => MetricSet::Local,
            FeatureMode::AllGlobal => MetricSet::Global,
            FeatureMode::All => MetricSet::All,
            FeatureMode::InfGcn4 => MetricSet::Explicit(INFGCN_FEATURES.to_vec()),
            FeatureMode::Explicit(list) => MetricSet::Explicit(list.clone()),
        }
    }

    pub fn uses_selection(&self) -> bool {
        matches!(self, FeatureMode::FnSelected | FeatureMode::LeaveOneOut(_))
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::FnSelected => f.write_str("fn-selected"),
            FeatureMode::AllLocal => f.write_str("all-local"),
            FeatureMode::AllGlobal => f.write_str("all-global"),
            FeatureMode::All => f.write_str("all"),
            FeatureMode::InfGcn4 => f.write_str("infgcn4"),
            FeatureMode::Explicit(list) => {
                let names: Vec<&str> = list.iter().map(|m| m.name()).collect();
                write!(f, "explicit:{}", names.join(","))
            }
            FeatureMode::LeaveOneOut(m) => write!(f, "loo:{m}"),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("explicit:") {
            let list = match rest.parse::<MetricSet>()? {
                MetricSet::Explicit(list) => list,
                other => other.metrics(),
            };
            if list.is_empty() {
                return Err(Error::InvalidConfig("explicit feature list is empty".into()));
            }
            return Ok(FeatureMode::Explicit(list));
        }
        if let Some(rest) = s.strip_prefix("loo:") {
            return Ok(FeatureMode::LeaveOneOut(rest.parse()?));
        }
        match s.to_ascii_lowercase().as_str() {
            "fn-selected" | "fn" => Ok(FeatureMode::FnSelected),
            "all-local" | "local" => Ok(FeatureMode::AllLocal),
            "all-global" | "global" => Ok(FeatureMode::AllGlobal),
            "all" => Ok(FeatureMode::All),
            "infgcn4" | "infgcn" => Ok(FeatureMode::InfGcn4),
            _ => Err(Error::InvalidConfig(format!("unknown feature mode `{s}`"))),
        }
    }
}

impl TryFrom<String> for FeatureMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureMode> for String {
    fn from(m: FeatureMode) -> Self {
        m.to_string()
    }
}

/// Model settings; unset fields take the variant's defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Option<Variant>,
    pub hidden_layers: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub beta_schedule: Option<BetaSchedule>,
    pub dropout: Option<f64>,
    pub learning_rate: Option<f64>,
    pub weight_decay_hidden: Option<f64>,
    pub weight_decay_fc: Option<f64>,
    pub patience: Option<usize>,
    pub max_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub stop_on: Option<StopOn>,
}

impl ModelSpec {
    /// A spec with every field set, so it resolves to exactly `m`.
    pub fn pinned(m: &ModelConfig) -> Self {
        Self {
            variant: Some(m.variant),
            hidden_layers: Some(m.hidden_layers),
            hidden_dim: Some(m.hidden_dim),
            alpha: Some(m.alpha),
            lambda: Some(m.lambda),
            beta_schedule: Some(m.beta_schedule),
            dropout: Some(m.dropout),
            learning_rate: Some(m.learning_rate),
            weight_decay_hidden: Some(m.weight_decay_hidden),
            weight_decay_fc: Some(m.weight_decay_fc),
            patience: Some(m.patience),
            max_epochs: Some(m.max_epochs),
            seed: Some(m.seed),
            stop_on: Some(m.stop_on),
        }
    }

    pub fn resolve(&self) -> ModelConfig {
        let d = ModelConfig::for_variant(self.variant.unwrap_or(Variant::Shallow));
        ModelConfig {
            variant: d.variant,
            hidden_layers: self.hidden_layers.unwrap_or(d.hidden_layers),
            hidden_dim: self.hidden_dim.unwrap_or(d.hidden_dim),
            alpha: self.alpha.unwrap_or(d.alpha),
            lambda: self.lambda.unwrap_or(d.lambda),
            beta_schedule: self.beta_schedule.unwrap_or(d.beta_schedule),
            dropout: self.dropout.unwrap_or(d.dropout),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            weight_decay_hidden: self.weight_decay_hidden.unwrap_or(d.weight_decay_hidden),
            weight_decay_fc: self.weight_decay_fc.unwrap_or(d.weight_decay_fc),
            patience: self.patience.unwrap_or(d.patience),
            max_epochs: self.max_epochs.unwrap_or(d.max_epochs),
            seed: self.seed.unwrap_or(d.seed),
            stop_on: self.stop_on.unwrap_or(d.stop_on),
        }
    }
}

fn default_depths() -> Vec<usize> {
    vec![3, 8, 16, 24, 32, 64]
}

fn default_modes() -> Vec<FeatureMode> {
    vec![FeatureMode::AllLocal, FeatureMode::AllGlobal, FeatureMode::All, FeatureMode::FnSelected, FeatureMode::InfGcn4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub depths: Vec<usize>,
    pub feature_modes: Vec<FeatureMode>,
    /// Run independent ablation variants on the rayon pool.
    pub parallel: bool,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self { depths: default_depths(), feature_modes: default_modes(), parallel: true }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// Everything needed to replay one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub features: FeatureMode,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub rank_ties: RankTies,
    #[serde(default)]
    pub centrality: CentralityOptions,
    #[serde(default)]
    pub sir: SirConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub ablation: AblationConfig,
}

impl ExperimentConfig {
    pub fn new(graph: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            graph: graph.into(),
            out_dir: out_dir.into(),
            features: FeatureMode::default(),
            delta: DEFAULT_DELTA,
            rank_ties: RankTies::default(),
            centrality: CentralityOptions::default(),
            sir: SirConfig::default(),
            dataset: DatasetConfig::default(),
            model: ModelSpec::default(),
            ablation: AblationConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if let FeatureMode::LeaveOneOut(m) = self.features {
            if !m.is_local() {
                return Err(Error::InvalidConfig(format!("{m} cannot be left out: selection only uses local metrics")));
            }
        }
        self.sir.validate()?;
        self.model.resolve().validate()
    }
}
