//! Monte-Carlo SIR influence scores and the balanced labeled dataset.
//!
//! Each node seeds `runs` independent discrete-time SIR outbreaks; its
//! influence capability is the mean final outbreak size over `N`. Random
//! numbers are addressed by position in a ChaCha stream keyed by
//! `(seed, node, run)`: the uniform for "infected node `v` tries neighbor
//! `k` during its `a`-th infectious step" always sits at the same offset.
//! Results therefore do not depend on thread count, and with a fixed
//! recovery rate larger infection rates couple monotonically.

use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{degree_stats, DegreeStats, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SirConfig {
    /// Simulations per seed node.
    pub runs: usize,
    /// Infection rate as a multiple of the critical rate.
    pub xi: f64,
    /// Recovery probability per step.
    pub gamma: f64,
    pub seed: u64,
    /// Use this infection rate directly instead of `xi · β_c`.
    pub beta_override: Option<f64>,
}

impl Default for SirConfig {
    fn default() -> Self {
        Self { runs: 1000, xi: 2.0, gamma: 1.0, seed: 0, beta_override: None }
    }
}

impl SirConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("SIR runs must be at least 1".into()));
        }
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidConfig(format!("xi must be positive, got {}", self.xi)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if let Some(b) = self.beta_override {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidConfig(format!("beta override must lie in [0, 1], got {b}")));
            }
        }
        Ok(())
    }

    /// Stable digest used to key cached scores.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        hex::encode(h.finalize())
    }
}

/// Mean-field epidemic threshold `⟨d⟩ / (⟨d²⟩ − ⟨d⟩)`, taken as one
/// division of the integer degree sums.
pub fn critical_beta(stats: &DegreeStats) -> Result<f64> {
    let denom = stats.square_sum.saturating_sub(stats.degree_sum);
    if denom == 0 {
        return Err(Error::DegenerateTopology { mean: stats.mean_degree, mean_square: stats.mean_square_degree });
    }
    Ok(stats.degree_sum as f64 / denom as f64)
}

/// Seekable uniform stream for one `(node, run)` pair.
pub struct SirStream {
    rng: ChaCha8Rng,
}

impl SirStream {
    pub fn new(seed: u64, node: usize, run: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((node as u64) << 32) | run as u64);
        Self { rng }
    }

    fn seek(&mut self, slot: u128) {
        // one u64 = two 32-bit words
        self.rng.set_word_pos(slot * 2);
    }

    fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

const RECOVERY_REGION: u128 = 1 << 62;

/// Scratch buffers reused across simulations on one thread.
pub struct SirScratch {
    state: Vec<u8>,
    touched: Vec<usize>,
    infected: Vec<(usize, u32)>,
    next: Vec<(usize, u32)>,
}

impl SirScratch {
    pub fn new(n: usize) -> Self {
        Self { state: vec![SUSCEPTIBLE; n], touched: Vec::new(), infected: Vec::new(), next: Vec::new() }
    }
}

const SUSCEPTIBLE: u8 = 0;
const INFECTED: u8 = 1;
const RECOVERED: u8 = 2;

/// One synchronous outbreak from `seed_node`; returns the number of nodes
/// ever infected (`|R| + |I|` at termination).
///
/// Each step, every infected node tries each susceptible neighbor with
/// probability `beta`; afterwards every node that was infected before the
/// step recovers with probability `gamma`.
pub fn simulate_once(
    g: &Graph,
    seed_node: usize,
    beta: f64,
    gamma: f64,
    stream: &mut SirStream,
    scratch: &mut SirScratch,
) -> usize {
    let slots = g.adjacency_len() as u128;
    let n = g.node_count() as u128;
    let SirScratch { state, touched, infected, next } = scratch;
    state[seed_node] = INFECTED;
    touched.push(seed_node);
    infected.push((seed_node, 0));
    let mut ever = 1usize;

    while !infected.is_empty() {
        next.clear();
        if beta > 0.0 {
            for &(v, age) in infected.iter() {
                stream.seek(age as u128 * slots + g.adjacency_offset(v) as u128);
                for &w in g.neighbors(v) {
                    let u = stream.next_uniform();
                    if state[w] == SUSCEPTIBLE && u < beta {
                        state[w] = INFECTED;
                        touched.push(w);
                        next.push((w, 0));
                        ever += 1;
                    }
                }
            }
        }
        for &(v, age) in infected.iter() {
            let recovers = gamma >= 1.0 || {
                stream.seek(RECOVERY_REGION + age as u128 * n + v as u128);
                stream.next_uniform() < gamma
            };
            if recovers {
                state[v] = RECOVERED;
            } else {
                next.push((v, age + 1));
            }
        }
        std::mem::swap(infected, next);
    }
    for &v in touched.iter() {
        state[v] = SUSCEPTIBLE;
    }
    touched.clear();
    ever
}

/// Per-node influence capability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceScores {
    pub ic: Vec<f64>,
    pub beta_c: Option<f64>,
    pub beta: f64,
}

impl InfluenceScores {
    /// CSV `node,ic`.
    pub fn write_csv(&self, g: &Graph, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "ic"])?;
        for (u, x) in self.ic.iter().enumerate() {
            w.write_record([g.name(u), &x.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads `node,ic` rows; `beta_c` and `beta` are not stored in the CSV.
    pub fn read_csv(g: &Graph, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut ic = vec![f64::NAN; g.node_count()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let label = rec.get(0).unwrap_or_default();
            let u = g
                .id_of(label)
                .ok_or_else(|| Error::Parse { line: line + 2, message: format!("node `{label}` is not in the graph") })?;
            let value = rec.get(1).unwrap_or_default();
            ic[u] = value
                .parse()
                .map_err(|_| Error::Parse { line: line + 2, message: format!("bad score `{value}`") })?;
        }
        if let Some(u) = ic.iter().position(|x| x.is_nan()) {
            return Err(Error::Parse { line: 0, message: format!("node `{}` has no score", g.name(u)) });
        }
        Ok(Self { ic, beta_c: None, beta: f64::NAN })
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for x in &self.ic {
            h.update(x.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Infection rate used for `cfg`: the override if set, otherwise
/// `min(1, xi · β_c)`.
pub fn effective_beta(g: &Graph, cfg: &SirConfig) -> Result<(Option<f64>, f64)> {
    if let Some(b) = cfg.beta_override {
        return Ok((critical_beta(&degree_stats(g)).ok(), b));
    }
    let beta_c = critical_beta(&degree_stats(g))?;
    Ok((Some(beta_c), (cfg.xi * beta_c).min(1.0)))
}

/// `IC(u) = Σ_runs outbreak size / (N · runs)`, computed in parallel over
/// seed nodes.
pub fn influence_scores(g: &Graph, cfg: &SirConfig) -> Result<InfluenceScores> {
    cfg.validate()?;
    let (beta_c, beta) = effective_beta(g, cfg)?;
    let n = g.node_count();
    let ic = (0..n)
        .into_par_iter()
        .map_init(
            || SirScratch::new(n),
            |scratch, u| {
                let total: usize = (0..cfg.runs)
                    .map(|run| {
                        let mut stream = SirStream::new(cfg.seed, u, run);
                        simulate_once(g, u, beta, cfg.gamma, &mut stream, scratch)
                    })
                    .sum();
                total as f64 / (n as f64 * cfg.runs as f64)
            },
        )
        .collect();
    Ok(InfluenceScores { ic, beta_c, beta })
}

/// How many non-influential nodes to sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeSampling {
    /// `ratio × |positives|` negatives.
    Ratio(f64),
    /// This fraction of all non-influential nodes.
    FractionOfRest(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub top_fraction: f64,
    pub negatives: NegativeSampling,
    pub split: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { top_fraction: 0.05, negatives: NegativeSampling::Ratio(2.0), split: 0.7, seed: 0 }
    }
}

/// Influential positives, sampled negatives, and a stratified split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub node_count: usize,
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub config: DatasetConfig,
}

impl LabeledDataset {
    /// `Some(1)` for positives, `Some(0)` for negatives, `None` otherwise.
    pub fn label(&self, u: usize) -> Option<u8> {
        if self.positives.binary_search(&u).is_ok() {
            Some(1)
        } else if self.negatives.binary_search(&u).is_ok() {
            Some(0)
        } else {
            None
        }
    }

    /// Per-node labels with unlabeled nodes set to 0; pair with a mask.
    pub fn label_vector(&self) -> Vec<u8> {
        let mut y = vec![0u8; self.node_count];
        for &u in &self.positives {
            y[u] = 1;
        }
        y
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("dataset serializes"));
        hex::encode(h.finalize())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Out<'a> {
            positives: &'a [usize],
            negatives: &'a [usize],
            train: &'a [usize],
            test: &'a [usize],
            labels: Vec<(usize, u8)>,
            config: &'a DatasetConfig,
            node_count: usize,
        }
        let mut labels: Vec<(usize, u8)> = self
            .positives
            .iter()
            .map(|&u| (u, 1))
            .chain(self.negatives.iter().map(|&u| (u, 0)))
            .collect();
        labels.sort();
        let out = Out {
            positives: &self.positives,
            negatives: &self.negatives,
            train: &self.train,
            test: &self.test,
            labels,
            config: &self.config,
            node_count: self.node_count,
        };
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, &out)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct In {
            positives: Vec<usize>,
            negatives: Vec<usize>,
            train: Vec<usize>,
            test: Vec<usize>,
            config: DatasetConfig,
            node_count: usize,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let d: In = serde_json::from_str(&text)?;
        Ok(Self {
            node_count: d.node_count,
            positives: d.positives,
            negatives: d.negatives,
            train: d.train,
            test: d.test,
            config: d.config,
        })
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Top `⌈top_fraction · N⌉` nodes by influence (ties to lower id) are
/// positives. Negatives are drawn without replacement from the rest with
/// probability proportional to influence. The labeled set is split
/// `split : 1 - split`, stratified by label.
pub fn build_dataset(scores: &InfluenceScores, cfg: &DatasetConfig) -> Result<LabeledDataset> {
    let n = scores.ic.len();
    if !(cfg.top_fraction > 0.0 && cfg.top_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("top fraction must lie in (0, 1], got {}", cfg.top_fraction)));
    }
    if !(cfg.split > 0.0 && cfg.split < 1.0) {
        return Err(Error::InvalidConfig(format!("split must lie in (0, 1), got {}", cfg.split)));
    }
    let n_pos = ((cfg.top_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores.ic[b].total_cmp(&scores.ic[a]).then(a.cmp(&b)));
    let mut positives: Vec<usize> = order[..n_pos.min(n)].to_vec();
    let rest: Vec<usize> = order[n_pos.min(n)..].to_vec();

    let n_neg = match cfg.negatives {
        NegativeSampling::Ratio(r) => round_half_up(r * n_pos as f64),
        NegativeSampling::FractionOfRest(f) => round_half_up(f * rest.len() as f64),
    };
    if n_neg == 0 || n_neg > rest.len() {
        return Err(Error::InsufficientNegatives { needed: n_neg.max(1), available: rest.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picked = index::sample_weighted(&mut rng, rest.len(), |i| scores.ic[rest[i]], n_neg)
        .map_err(|e| Error::InvalidConfig(format!("negative sampling: {e}")))?;
    let mut negatives: Vec<usize> = picked.iter().map(|i| rest[i]).collect();

    positives.sort_unstable();
    negatives.sort_unstable();

    let total = positives.len() + negatives.len();
    let n_train = round_half_up(cfg.split * total as f64);
    let train_pos = round_half_up(cfg.split * positives.len() as f64).min(n_train).min(positives.len());
    let train_neg = (n_train - train_pos).min(negatives.len());

    let mut shuffled_pos = positives.clone();
    let mut shuffled_neg = negatives.clone();
    shuffled_pos.shuffle(&mut rng);
    shuffled_neg.shuffle(&mut rng);
    let mut train: Vec<usize> = shuffled_pos[..train_pos].iter().chain(&shuffled_neg[..train_neg]).copied().collect();
    let mut test: Vec<usize> = shuffled_pos[train_pos..].iter().chain(&shuffled_neg[train_neg..]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok(LabeledDataset { node_count: n, positives, negatives, train, test, config: *cfg })
}
