use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{prepare, resolve_features, run_prepared, ExperimentConfig, FeatureMode, Prepared, RunRecord};
use crate::centrality::{Metric, MetricSet};
use crate::error::{Error, Result, Stage, StageExt};
use crate::gcn::{ModelConfig, Variant};

fn run_all<T: Sync>(
    parallel: bool,
    items: &[T],
    f: impl Fn(&T) -> Result<RunRecord> + Sync + Send,
) -> Result<Vec<RunRecord>> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect()
}

/// One deep-model run per depth on a shared labeling. Writes
/// `ablation-depth/depth.csv` with columns `depth,accuracy,f1,auc`.
pub fn ablate_depth(cfg: &ExperimentConfig, depths: &[usize]) -> Result<Vec<RunRecord>> {
    if depths.is_empty() {
        return Err(Error::InvalidConfig("depth sweep needs at least one depth".into()).at(Stage::Config));
    }
    let base = cfg.model.resolve();
    if base.variant != Variant::Deep {
        return Err(Error::InvalidConfig("the depth sweep uses the deep variant".into()).at(Stage::Config));
    }
    if depths.contains(&0) {
        return Err(Error::InvalidConfig("depths must be positive".into()).at(Stage::Config));
    }
    let prep = prepare(cfg, &cfg.features.required())?;
    let root = cfg.out_dir.join("ablation-depth");
    let records = run_all(cfg.ablation.parallel, depths, |&d| {
        let model = ModelConfig { hidden_layers: d, ..base };
        run_prepared(&prep, cfg, &cfg.features, &model, &root.join(format!("depth-{d}")))
    })?;
    let write = || -> Result<()> {
        let mut w = csv_writer(&root.join("depth.csv"))?;
        w.write_record(["depth", "accuracy", "f1", "auc"])?;
        for (d, r) in depths.iter().zip(&records) {
            let m = &r.metrics;
            w.write_record([d.to_string(), m.accuracy.to_string(), m.f1.to_string(), m.auc.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&root, e))
    };
    write().stage(Stage::Persist)?;
    Ok(records)
}

fn union_required(modes: &[FeatureMode]) -> MetricSet {
    let mut all: Vec<Metric> = modes.iter().flat_map(|m| m.required().metrics()).collect();
    all.sort();
    all.dedup();
    MetricSet::Explicit(all)
}

/// One run per feature mode, all on the same labeling. Writes
/// `ablation-features/features.csv`.
pub fn ablate_features(cfg: &ExperimentConfig, modes: &[FeatureMode]) -> Result<Vec<RunRecord>> {
    if modes.is_empty() {
        return Err(Error::InvalidConfig("feature ablation needs at least one mode".into()).at(Stage::Config));
    }
    let prep = prepare(cfg, &union_required(modes))?;
    let root = cfg.out_dir.join("ablation-features");
    let model = cfg.model.resolve();
    let indexed: Vec<(usize, &FeatureMode)> = modes.iter().enumerate().collect();
    let records = run_all(cfg.ablation.parallel, &indexed, |&(i, mode)| {
        run_prepared(&prep, cfg, mode, &model, &root.join(format!("{i:02}-{}", slug(&mode.to_string()))))
    })?;
    let write = || -> Result<()> {
        let mut w = csv_writer(&root.join("features.csv"))?;
        w.write_record(["mode", "features", "accuracy", "f1", "auc", "dataset_hash"])?;
        for (mode, r) in modes.iter().zip(&records) {
            let m = &r.metrics;
            w.write_record([
                mode.to_string(),
                r.features.join(";"),
                m.accuracy.to_string(),
                m.f1.to_string(),
                m.auc.to_string(),
                r.dataset.hash.clone(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&root, e))
    };
    write().stage(Stage::Persist)?;
    Ok(records)
}

/// Effect of dropping one selected metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOneOutRow {
    pub metric: Metric,
    pub accuracy: f64,
    pub f1: f64,
    pub auc: f64,
    /// Baseline minus leave-one-out; positive means the metric helped.
    pub delta_accuracy: f64,
    pub delta_f1: f64,
    pub delta_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOneOutStudy {
    pub baseline: RunRecord,
    /// One record per selected metric, in selection order.
    pub records: Vec<RunRecord>,
    /// Rows sorted by accuracy loss, then F1 loss, then AUC loss
    /// (largest first), then metric name.
    pub summary: Vec<LeaveOneOutRow>,
}

fn rank_rows(rows: &mut [LeaveOneOutRow]) {
    rows.sort_by(|a, b| {
        b.delta_accuracy
            .total_cmp(&a.delta_accuracy)
            .then(b.delta_f1.total_cmp(&a.delta_f1))
            .then(b.delta_auc.total_cmp(&a.delta_auc))
            .then(a.metric.name().cmp(b.metric.name()))
    });
}

fn baseline_and_loo(prep: &Prepared, cfg: &ExperimentConfig, root: &Path) -> Result<LeaveOneOutStudy> {
    let (chosen, _) = resolve_features(&FeatureMode::FnSelected, &prep.table, cfg.delta).stage(Stage::Selection)?;
    let model = cfg.model.resolve();
    let mut modes = vec![FeatureMode::FnSelected];
    modes.extend(chosen.iter().map(|&m| FeatureMode::LeaveOneOut(m)));
    let dirs: Vec<(FeatureMode, PathBuf)> = modes
        .into_iter()
        .map(|mode| {
            let dir = match &mode {
                FeatureMode::LeaveOneOut(m) => root.join(format!("without-{}", m.name())),
                _ => root.join("baseline"),
            };
            (mode, dir)
        })
        .collect();
    let mut records =
        run_all(cfg.ablation.parallel, &dirs, |(mode, dir)| run_prepared(prep, cfg, mode, &model, dir))?;
    let baseline = records.remove(0);
    let base = baseline.metrics;
    let mut summary: Vec<LeaveOneOutRow> = chosen
        .iter()
        .zip(&records)
        .map(|(&metric, r)| LeaveOneOutRow {
            metric,
            accuracy: r.metrics.accuracy,
            f1: r.metrics.f1,
            auc: r.metrics.auc,
            delta_accuracy: base.accuracy - r.metrics.accuracy,
            delta_f1: base.f1 - r.metrics.f1,
            delta_auc: base.auc - r.metrics.auc,
        })
        .collect();
    rank_rows(&mut summary);
    Ok(LeaveOneOutStudy { baseline, records, summary })
}

/// Re-runs the selected-feature model once per selected metric with that
/// metric removed. Writes `ablation-loo/loo.csv` ranked by degradation.
pub fn ablate_leave_one_out(cfg: &ExperimentConfig) -> Result<LeaveOneOutStudy> {
    let prep = prepare(cfg, &MetricSet::Local)?;
    let root = cfg.out_dir.join("ablation-loo");
    let study = baseline_and_loo(&prep, cfg, &root)?;
    let write = || -> Result<()> {
        let mut w = csv_writer(&root.join("loo.csv"))?;
        w.write_record(["rank", "metric", "accuracy", "f1", "auc", "delta_accuracy", "delta_f1", "delta_auc"])?;
        for (i, r) in study.summary.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                r.metric.name().to_string(),
                r.accuracy.to_string(),
                r.f1.to_string(),
                r.auc.to_string(),
                r.delta_accuracy.to_string(),
                r.delta_f1.to_string(),
                r.delta_auc.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&root, e))
    };
    write().stage(Stage::Persist)?;
    Ok(study)
}
