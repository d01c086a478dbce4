use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{forward, loss, loss_and_gradients, DecayGroup, ModelParameters, Tensor};
use super::{ModelConfig, StopOn};
use crate::error::{Error, Result};
use crate::graph::AdjustedTransition;
use crate::sir::LabeledDataset;

/// Per-epoch losses of one training run.
///
/// Equality ignores `wall_time_secs` so that two seeded runs compare equal.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    /// Held-out training loss; empty unless stopping on a validation split.
    #[serde(default)]
    pub validation_loss: Vec<f64>,
    /// Epoch whose parameters were kept (minimum monitored loss).
    pub chosen_epoch: usize,
    pub stopped_early: bool,
    pub wall_time_secs: f64,
}

impl PartialEq for TrainTrace {
    fn eq(&self, other: &Self) -> bool {
        self.train_loss == other.train_loss
            && self.test_loss == other.test_loss
            && self.validation_loss == other.validation_loss
            && self.chosen_epoch == other.chosen_epoch
            && self.stopped_early == other.stopped_early
    }
}

impl TrainTrace {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// The loss early stopping watched.
    pub fn monitored(&self) -> &[f64] {
        if self.validation_loss.is_empty() {
            &self.test_loss
        } else {
            &self.validation_loss
        }
    }
}

struct Adam {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

impl Adam {
    fn new(params: &ModelParameters) -> Self {
        let zeros: Vec<_> = params.tensors.iter().map(|t| Array2::zeros(t.value.dim())).collect();
        Self { m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, params: &mut ModelParameters, grads: Vec<Array2<f64>>, cfg: &ModelConfig) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (i, (tensor, mut g)) in params.tensors.iter_mut().zip(grads).enumerate() {
            let decay = cfg.decay_for(tensor.group);
            if decay > 0.0 {
                g.scaled_add(decay, &tensor.value);
            }
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            ndarray::Zip::from(&mut tensor.value).and(m).and(v).and(&g).for_each(|w, m, v, &g| {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *w -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + EPS);
            });
        }
    }
}

fn divergence(epoch: usize, trace: &TrainTrace, started: Instant) -> Error {
    let mut trace = trace.clone();
    trace.wall_time_secs = started.elapsed().as_secs_f64();
    Error::Divergence { epoch, trace: Box::new(trace) }
}

fn split_validation(dataset: &LabeledDataset, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut fit = Vec::new();
    let mut held = Vec::new();
    for class in [1u8, 0] {
        let mut nodes: Vec<usize> = dataset.train.iter().copied().filter(|&u| dataset.label(u) == Some(class)).collect();
        nodes.shuffle(&mut rng);
        let k = (fraction * nodes.len() as f64).round() as usize;
        held.extend_from_slice(&nodes[..k]);
        fit.extend_from_slice(&nodes[k..]);
    }
    fit.sort_unstable();
    held.sort_unstable();
    (fit, held)
}

/// Full-batch transductive training with Adam and early stopping. Returns
/// the parameters from the epoch with the lowest monitored loss.
pub fn train(
    p: &AdjustedTransition,
    x: ArrayView2<'_, f64>,
    dataset: &LabeledDataset,
    cfg: &ModelConfig,
) -> Result<(ModelParameters, TrainTrace)> {
    cfg.validate()?;
    if dataset.node_count != p.dim() || x.nrows() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dataset covers {} nodes, features {}, graph {}",
            dataset.node_count,
            x.nrows(),
            p.dim()
        )));
    }
    if dataset.test.is_empty() {
        return Err(Error::EmptyMask);
    }
    let labels = dataset.label_vector();
    let (fit, held) = match cfg.stop_on {
        StopOn::Test => (dataset.train.clone(), Vec::new()),
        StopOn::Validation(f) => split_validation(dataset, f, cfg.seed),
    };
    if fit.is_empty() || (matches!(cfg.stop_on, StopOn::Validation(_)) && held.is_empty()) {
        return Err(Error::EmptyMask);
    }

    let started = Instant::now();
    let mut params = ModelParameters::init(cfg, x.ncols());
    let mut adam = Adam::new(&params);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(1);
    let mut trace = TrainTrace::default();
    let mut best = (f64::INFINITY, params.clone());
    let mut stale = 0usize;

    for epoch in 0..cfg.max_epochs {
        let (train_loss, grads) = match loss_and_gradients(&params, cfg, p, x, &labels, &fit, Some(&mut dropout_rng)) {
            Ok(r) => r,
            Err(Error::Divergence { .. }) => return Err(divergence(epoch, &trace, started)),
            Err(e) => return Err(e),
        };
        if !train_loss.is_finite() {
            return Err(divergence(epoch, &trace, started));
        }
        adam.step(&mut params, grads, cfg);
        if !params.is_finite() {
            return Err(divergence(epoch, &trace, started));
        }
        let eval = match forward(&params, cfg, p, x, None) {
            Ok(fp) => fp.log_probs,
            Err(Error::Divergence { .. }) => return Err(divergence(epoch, &trace, started)),
            Err(e) => return Err(e),
        };
        let test_loss = loss(&eval, &labels, &dataset.test)?;
        trace.train_loss.push(train_loss);
        trace.test_loss.push(test_loss);
        let monitored = if held.is_empty() {
            test_loss
        } else {
            let v = loss(&eval, &labels, &held)?;
            trace.validation_loss.push(v);
            v
        };
        if !monitored.is_finite() {
            return Err(divergence(epoch, &trace, started));
        }
        if monitored < best.0 {
            best = (monitored, params.clone());
            trace.chosen_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.patience {
                trace.stopped_early = true;
                break;
            }
        }
    }
    trace.wall_time_secs = started.elapsed().as_secs_f64();
    log::debug!(
        "trained {} epochs, kept epoch {} (monitored loss {:.6})",
        trace.epochs(),
        trace.chosen_epoch,
        best.0
    );
    Ok((best.1, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: u8,
    /// Probability of the influential class.
    pub probability: f64,
}

/// Dropout-free forward pass; ties go to class 0.
pub fn predict(
    params: &ModelParameters,
    cfg: &ModelConfig,
    p: &AdjustedTransition,
    x: ArrayView2<'_, f64>,
) -> Result<Vec<Prediction>> {
    let fp = forward(params, cfg, p, x, None)?;
    Ok(fp
        .log_probs
        .rows()
        .into_iter()
        .map(|r| Prediction { class: u8::from(r[1] > r[0]), probability: r[1].exp() })
        .collect())
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    group: DecayGroup,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct InitRecord {
    scheme: String,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    config: ModelConfig,
    init: InitRecord,
    tensors: Vec<TensorRecord>,
}

/// JSON with the config and every tensor in row-major order.
pub fn save_checkpoint(path: &Path, cfg: &ModelConfig, params: &ModelParameters) -> Result<()> {
    let ck = Checkpoint {
        version: CHECKPOINT_VERSION,
        config: *cfg,
        init: InitRecord { scheme: params.init_scheme.clone(), seed: params.init_seed },
        tensors: params
            .tensors
            .iter()
            .map(|t| TensorRecord {
                name: t.name.clone(),
                group: t.group,
                rows: t.value.nrows(),
                cols: t.value.ncols(),
                data: t.value.iter().copied().collect(),
            })
            .collect(),
    };
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(std::io::BufWriter::new(f), &ck)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelConfig, ModelParameters)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ck: Checkpoint = serde_json::from_str(&text)?;
    if ck.version != CHECKPOINT_VERSION {
        return Err(Error::Serde(format!("unsupported checkpoint version {}", ck.version)));
    }
    let tensors = ck
        .tensors
        .into_iter()
        .map(|t| {
            Array2::from_shape_vec((t.rows, t.cols), t.data)
                .map(|value| Tensor { name: t.name, group: t.group, value })
                .map_err(|e| Error::Serde(format!("tensor shape: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let params = ModelParameters { variant: ck.config.variant, tensors, init_scheme: ck.init.scheme, init_seed: ck.init.seed };
    let in_features = params.tensors.first().map_or(0, |t| t.value.nrows());
    params.check_shapes(&ck.config, in_features)?;
    Ok((ck.config, params))
}
