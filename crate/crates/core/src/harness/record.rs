use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::features::SelectionReport;
use crate::gcn::{ModelConfig, TrainTrace};
use crate::metrics::MetricsReport;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// JSON Schema (draft 2020-12) every serialized [`RunRecord`] satisfies.
pub const RUN_RECORD_SCHEMA: &str = include_str!("../../schema/run-record.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSummary {
    pub path: PathBuf,
    pub hash: String,
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub hash: String,
    pub scores_hash: String,
    pub beta: f64,
    pub beta_c: Option<f64>,
    pub scores_cached: bool,
    pub positives: usize,
    pub negatives: usize,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    /// Seconds per pipeline stage.
    pub stages: BTreeMap<String, f64>,
    /// Seconds per centrality metric.
    pub centralities: BTreeMap<String, f64>,
}

/// Self-contained result of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub model: ModelConfig,
    pub graph: GraphSummary,
    pub features: Vec<String>,
    pub selection: Option<SelectionReport>,
    pub dataset: DatasetSummary,
    pub trace: TrainTrace,
    pub metrics: MetricsReport,
    pub train_metrics: MetricsReport,
    pub timings: Timings,
}

impl RunRecord {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
