use std::fmt;
use std::path::PathBuf;

use crate::gcn::TrainTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Load,
    Centrality,
    Selection,
    Normalization,
    Labeling,
    Dataset,
    Training,
    Evaluation,
    Persist,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Centrality => "centrality",
            Stage::Selection => "selection",
            Stage::Normalization => "normalization",
            Stage::Labeling => "labeling",
            Stage::Dataset => "dataset",
            Stage::Training => "training",
            Stage::Evaluation => "evaluation",
            Stage::Persist => "persist",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("degenerate topology: <d^2> = {mean_square} must exceed <d> = {mean}")]
    DegenerateTopology { mean: f64, mean_square: f64 },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need {needed} negative candidates but only {available} nodes remain")]
    InsufficientNegatives { needed: usize, available: usize },

    #[error("evaluation needs both classes in the ground truth")]
    SingleClass,

    #[error("loss mask is empty")]
    EmptyMask,

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize, trace: Box<TrainTrace> },

    #[error("serialization: {0}")]
    Serde(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Tags the error with the stage it happened in. Already-tagged errors
    /// keep their original stage.
    pub fn at(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
