//! End-to-end orchestration, ablations, and the centrality timing benchmark.
//!
//! Every run writes its artifacts under its output directory as it goes, so
//! a failing stage leaves the earlier outputs in place.

mod ablation;
mod config;
mod record;
mod timing;

pub use ablation::{ablate_depth, ablate_features, ablate_leave_one_out, LeaveOneOutRow, LeaveOneOutStudy};
pub use config::{AblationConfig, ExperimentConfig, FeatureMode, ModelSpec, INFGCN_FEATURES};
pub use record::{DatasetSummary, GraphSummary, RunRecord, Timings, RECORD_SCHEMA_VERSION, RUN_RECORD_SCHEMA};
pub use timing::{timing_benchmark, write_timing_csv, TimingRow};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::centrality::{compute_with, CentralityTable, Metric, MetricSet};
use crate::error::{Error, Result, Stage, StageExt};
use crate::features::{normalize, select_features, FeatureMatrix, SelectionReport};
use crate::gcn::{predict, save_checkpoint, train, ModelConfig};
use crate::graph::{adjusted_transition, load_edge_list, AdjustedTransition, Graph, IngestReport, LoadOptions};
use crate::metrics::{evaluate, MetricsReport};
use crate::sir::{build_dataset, influence_scores, InfluenceScores, LabeledDataset, SirConfig};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Influence scores for `g`, reusing `cache_dir/sir-<graph>-<config>.json`
/// when present. Returns whether the cache was hit.
pub fn cached_influence_scores(g: &Graph, cfg: &SirConfig, cache_dir: &Path) -> Result<(InfluenceScores, bool)> {
    let path = cache_dir.join(format!("sir-{}-{}.json", &g.content_hash()[..16], &cfg.digest()[..16]));
    if let Ok(text) = std::fs::read_to_string(&path) {
        match serde_json::from_str::<InfluenceScores>(&text) {
            Ok(s) if s.ic.len() == g.node_count() => {
                log::info!("reusing influence scores from {}", path.display());
                return Ok((s, true));
            }
            _ => log::warn!("ignoring unreadable cache file {}", path.display()),
        }
    }
    let scores = influence_scores(g, cfg)?;
    ensure_dir(cache_dir)?;
    std::fs::write(&path, serde_json::to_vec(&scores)?).map_err(|e| Error::io(&path, e))?;
    Ok((scores, false))
}

/// Work shared by every run of one invocation: the graph, the centrality
/// columns, and one SIR labeling with its dataset.
pub struct Prepared {
    pub graph_path: PathBuf,
    pub graph: Graph,
    pub ingest: IngestReport,
    pub transition: AdjustedTransition,
    pub table: CentralityTable,
    pub scores: InfluenceScores,
    pub scores_cached: bool,
    pub dataset: LabeledDataset,
    stage_timings: BTreeMap<String, f64>,
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().stage(stage);
    *timings.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
    out
}

/// Loads the graph, computes `metrics`, labels nodes, and builds the dataset.
pub fn prepare(cfg: &ExperimentConfig, metrics: &MetricSet) -> Result<Prepared> {
    cfg.validate().stage(Stage::Config)?;
    ensure_dir(&cfg.out_dir).stage(Stage::Persist)?;
    let mut t = BTreeMap::new();
    let (graph, ingest) = timed(&mut t, Stage::Load, || load_edge_list(&cfg.graph, &LoadOptions::default()))?;
    log::info!("loaded {} nodes, {} edges from {}", graph.node_count(), graph.edge_count(), cfg.graph.display());
    let table = timed(&mut t, Stage::Centrality, || compute_with(&graph, metrics, &cfg.centrality))?;
    let (scores, scores_cached) =
        timed(&mut t, Stage::Labeling, || cached_influence_scores(&graph, &cfg.sir, &cfg.out_dir.join("cache")))?;
    let dataset = timed(&mut t, Stage::Dataset, || build_dataset(&scores, &cfg.dataset))?;
    let transition = adjusted_transition(&graph);
    Ok(Prepared { graph_path: cfg.graph.clone(), graph, ingest, transition, table, scores, scores_cached, dataset, stage_timings: t })
}

/// Feature columns for `mode`, plus the selection report when the feature
/// network was used.
pub fn resolve_features(
    mode: &FeatureMode,
    table: &CentralityTable,
    delta: f64,
) -> Result<(Vec<Metric>, Option<SelectionReport>)> {
    if !mode.uses_selection() {
        return Ok((mode.required().metrics(), None));
    }
    let local: Vec<Metric> = Metric::local().collect();
    let (net, selection) = select_features(&table.select(&local)?, delta)?;
    let report = SelectionReport::new(&net, &selection);
    let mut chosen = selection.chosen;
    if let FeatureMode::LeaveOneOut(m) = mode {
        let before = chosen.len();
        chosen.retain(|c| c != m);
        if chosen.len() == before {
            return Err(Error::InvalidConfig(format!("{m} is not among the selected features")));
        }
        if chosen.is_empty() {
            return Err(Error::InvalidConfig("leaving out the only selected feature leaves no features".into()));
        }
    }
    Ok((chosen, Some(report)))
}

fn labels_of(dataset: &LabeledDataset, nodes: &[usize]) -> Vec<u8> {
    nodes.iter().map(|&u| dataset.label(u).expect("masks hold labeled nodes")).collect()
}

fn evaluate_on(
    preds: &[crate::gcn::Prediction],
    dataset: &LabeledDataset,
    nodes: &[usize],
) -> Result<MetricsReport> {
    let classes: Vec<u8> = nodes.iter().map(|&u| preds[u].class).collect();
    let scores: Vec<f64> = nodes.iter().map(|&u| preds[u].probability).collect();
    evaluate(&classes, &scores, &labels_of(dataset, nodes))
}

/// Selection, normalization, training, and evaluation on prepared data.
/// Artifacts go to `out_dir`.
pub fn run_prepared(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    mode: &FeatureMode,
    model: &ModelConfig,
    out_dir: &Path,
) -> Result<RunRecord> {
    ensure_dir(out_dir).stage(Stage::Persist)?;
    let mut t = prep.stage_timings.clone();
    let (chosen, selection) = timed(&mut t, Stage::Selection, || resolve_features(mode, &prep.table, cfg.delta))?;
    if let Some(report) = &selection {
        let path = out_dir.join("selection.json");
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e)).stage(Stage::Persist)?;
        serde_json::to_writer_pretty(f, report).map_err(Error::from).stage(Stage::Persist)?;
    }
    let features: FeatureMatrix =
        timed(&mut t, Stage::Normalization, || normalize(&prep.table, &chosen, cfg.rank_ties))?;
    features.write_csv(&prep.graph, &out_dir.join("features.csv")).stage(Stage::Persist)?;
    prep.dataset.write_json(&out_dir.join("dataset.json")).stage(Stage::Persist)?;

    let (params, trace) =
        timed(&mut t, Stage::Training, || train(&prep.transition, features.values.view(), &prep.dataset, model))?;
    save_checkpoint(&out_dir.join("model.json"), model, &params).stage(Stage::Persist)?;

    let (metrics, train_metrics) = timed(&mut t, Stage::Evaluation, || {
        let preds = predict(&params, model, &prep.transition, features.values.view())?;
        Ok((evaluate_on(&preds, &prep.dataset, &prep.dataset.test)?, evaluate_on(&preds, &prep.dataset, &prep.dataset.train)?))
    })?;
    let metrics_path = out_dir.join("metrics.json");
    std::fs::write(&metrics_path, serde_json::to_vec_pretty(&metrics)?)
        .map_err(|e| Error::io(&metrics_path, e))
        .stage(Stage::Persist)?;

    let centralities =
        prep.table.metrics().iter().zip(prep.table.timings()).map(|(m, &s)| (m.name().to_string(), s)).collect();
    let mut cfg = cfg.clone();
    cfg.features = mode.clone();
    cfg.model = ModelSpec::pinned(model);
    cfg.out_dir = out_dir.to_path_buf();
    let record = RunRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        config: cfg,
        model: *model,
        graph: GraphSummary {
            path: prep.graph_path.clone(),
            hash: prep.graph.content_hash(),
            nodes: prep.graph.node_count(),
            edges: prep.graph.edge_count(),
            self_loops_dropped: prep.ingest.self_loops,
            duplicates_dropped: prep.ingest.duplicates,
        },
        features: features.names.clone(),
        selection,
        dataset: DatasetSummary {
            hash: prep.dataset.digest(),
            scores_hash: prep.scores.digest(),
            beta: prep.scores.beta,
            beta_c: prep.scores.beta_c,
            scores_cached: prep.scores_cached,
            positives: prep.dataset.positives.len(),
            negatives: prep.dataset.negatives.len(),
            train: prep.dataset.train.len(),
            test: prep.dataset.test.len(),
        },
        trace,
        metrics,
        train_metrics,
        timings: Timings { stages: t, centralities },
    };
    record.write_json(&out_dir.join("record.json")).stage(Stage::Persist)?;
    Ok(record)
}

/// Load → centralities → selection → normalization → SIR labels → dataset
/// → training → evaluation, persisting every artifact under `cfg.out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let prep = prepare(cfg, &cfg.features.required())?;
    prep.table.write_csv(&prep.graph, &cfg.out_dir.join("centralities.csv")).stage(Stage::Persist)?;
    prep.scores.write_csv(&prep.graph, &cfg.out_dir.join("ic.csv")).stage(Stage::Persist)?;
    run_prepared(&prep, cfg, &cfg.features, &cfg.model.resolve(), &cfg.out_dir)
}
