//! Centrality selection through a feature network.
//!
//! Every centrality becomes a node; two centralities are linked when the
//! Spearman correlation of their per-node scores exceeds a threshold. The
//! network is split into groups by modularity maximization, one
//! representative is chosen per group, and the chosen columns are turned
//! into rank-normalized node features.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityTable, Metric};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_DELTA: f64 = 0.9;

/// Ranks starting at 1 in ascending order of value, ties sharing the
/// average of the positions they span.
pub fn fractional_ranks(x: ArrayView1<'_, f64>) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share their mean
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with average ranks for ties. Zero when either
/// input is constant.
pub fn spearman(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidConfig(format!("spearman needs at least 2 observations, got {}", x.len())));
    }
    Ok(pearson(&fractional_ranks(x), &fractional_ranks(y)))
}

/// Centralities linked by strong rank correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNetwork {
    pub metrics: Vec<Metric>,
    /// Full correlation matrix, row-major, aligned with `metrics`.
    pub scc: Vec<Vec<f64>>,
    /// Index pairs `(i, j)`, `i < j`, with `scc[i][j] > delta`.
    pub edges: Vec<(usize, usize)>,
    pub delta: f64,
}

impl FeatureNetwork {
    pub fn index_of(&self, m: Metric) -> Option<usize> {
        self.metrics.iter().position(|&x| x == m)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn adjacent(&self, a: Metric, b: Metric) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.edges.contains(&(i.min(j), i.max(j))),
            _ => false,
        }
    }
}

pub fn build_feature_network(table: &CentralityTable, delta: f64) -> Result<FeatureNetwork> {
    let m = table.metrics().len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!("feature network needs at least 2 metrics, got {m}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidConfig(format!("delta must lie in [0, 1), got {delta}")));
    }
    if table.node_count() < 2 {
        return Err(Error::InvalidConfig("feature network needs at least 2 nodes".into()));
    }
    let ranks: Vec<Vec<f64>> = (0..m).map(|j| fractional_ranks(table.values().column(j))).collect();
    let mut scc = vec![vec![0.0; m]; m];
    let mut edges = Vec::new();
    for i in 0..m {
        scc[i][i] = 1.0;
        for j in i + 1..m {
            let r = pearson(&ranks[i], &ranks[j]);
            scc[i][j] = r;
            scc[j][i] = r;
            if r > delta {
                edges.push((i, j));
            }
        }
    }
    Ok(FeatureNetwork { metrics: table.metrics().to_vec(), scc, edges, delta })
}

/// Partitions the feature network by Louvain-style modularity maximization
/// at resolution 1.
///
/// Nodes are visited in ascending name order and a node moves only on a
/// strict modularity gain, so the result is fully deterministic. Groups are
/// returned with members sorted by name, ordered by their first member.
pub fn cluster(net: &FeatureNetwork) -> Vec<Vec<Metric>> {
    let mut order: Vec<usize> = (0..net.metrics.len()).collect();
    order.sort_by_key(|&i| net.metrics[i].name());
    // position in name order -> original index
    let k = order.len();
    let mut pos = vec![0; k];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(a, b) in &net.edges {
        let (a, b) = (pos[a], pos[b]);
        *weights.entry((a.min(b), a.max(b))).or_default() += 1.0;
    }
    let membership = louvain(k, &weights);

    let mut groups: BTreeMap<usize, Vec<Metric>> = BTreeMap::new();
    for (p, &c) in membership.iter().enumerate() {
        groups.entry(c).or_default().push(net.metrics[order[p]]);
    }
    let mut groups: Vec<Vec<Metric>> = groups.into_values().collect();
    for g in &mut groups {
        g.sort_by_key(|m| m.name());
    }
    groups.sort_by_key(|g| g[0].name());
    groups
}

/// Multi-level Louvain on an undirected weighted graph whose edges are
/// keyed `(a, b)` with `a < b`. Returns a community label per node.
fn louvain(n: usize, edges: &BTreeMap<(usize, usize), f64>) -> Vec<usize> {
    let mut membership: Vec<usize> = (0..n).collect();
    let total: f64 = edges.values().sum();
    if total == 0.0 {
        return membership;
    }
    let two_m = 2.0 * total;

    let mut level_nodes = n;
    let mut level_edges = edges.clone();
    loop {
        // adjacency with self-loop weights kept separately
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); level_nodes];
        let mut self_w = vec![0.0; level_nodes];
        for (&(a, b), &w) in &level_edges {
            if a == b {
                self_w[a] += w;
            } else {
                adj[a].push((b, w));
                adj[b].push((a, w));
            }
        }
        let strength: Vec<f64> =
            (0..level_nodes).map(|i| 2.0 * self_w[i] + adj[i].iter().map(|&(_, w)| w).sum::<f64>()).collect();

        let mut comm: Vec<usize> = (0..level_nodes).collect();
        let mut comm_total = strength.clone();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for i in 0..level_nodes {
                let own = comm[i];
                comm_total[own] -= strength[i];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for &(j, w) in &adj[i] {
                    *links.entry(comm[j]).or_default() += w;
                }
                let gain = |c: usize, links: &BTreeMap<usize, f64>| {
                    links.get(&c).copied().unwrap_or(0.0) - comm_total[c] * strength[i] / two_m
                };
                let mut best = own;
                let mut best_gain = gain(own, &links);
                for &c in links.keys() {
                    let g = gain(c, &links);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                comm[i] = best;
                comm_total[best] += strength[i];
                if best != own {
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        if !moved_any {
            break;
        }

        // relabel communities densely in order of first appearance
        let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
        let mut dense = vec![0; level_nodes];
        for i in 0..level_nodes {
            let next = relabel.len();
            dense[i] = *relabel.entry(comm[i]).or_insert(next);
        }
        for m in membership.iter_mut() {
            *m = dense[*m];
        }
        let mut aggregated: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(a, b), &w) in &level_edges {
            let (ca, cb) = (dense[a], dense[b]);
            *aggregated.entry((ca.min(cb), ca.max(cb))).or_default() += w;
        }
        level_nodes = relabel.len();
        level_edges = aggregated;
    }
    membership
}

/// Candidate ranking for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTrace {
    pub group: Vec<Metric>,
    /// `(metric, feature-network degree, chosen neighbor that blocked it)`
    pub candidates: Vec<(Metric, usize, Option<Metric>)>,
    pub chosen: Metric,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub groups: Vec<Vec<Metric>>,
    pub chosen: Vec<Metric>,
    pub provenance: Vec<GroupTrace>,
    pub fallback_used: bool,
}

/// Picks one metric per group.
///
/// Groups are visited in order of their alphabetically first member.
/// Within a group, candidates are ranked by feature-network degree
/// (descending, then name) and the first one with no already-chosen
/// neighbor wins. If every candidate is blocked, the top-ranked candidate
/// is taken anyway and the trace records the fallback.
pub fn select_representatives(net: &FeatureNetwork, groups: &[Vec<Metric>]) -> Result<SelectionResult> {
    let mut seen: Vec<Metric> = groups.iter().flatten().copied().collect();
    seen.sort();
    let mut expected = net.metrics.clone();
    expected.sort();
    if seen != expected {
        return Err(Error::InvalidConfig("groups do not partition the feature network".into()));
    }

    let mut ordered: Vec<Vec<Metric>> = groups
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_by_key(|m| m.name());
            g
        })
        .collect();
    ordered.sort_by_key(|g| g[0].name());

    let mut chosen: Vec<Metric> = Vec::new();
    let mut provenance = Vec::new();
    for group in &ordered {
        let mut candidates: Vec<(Metric, usize)> =
            group.iter().map(|&m| (m, net.degree(net.index_of(m).unwrap()))).collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.name().cmp(b.0.name())));

        let mut trace = Vec::new();
        let mut pick = None;
        for &(m, deg) in &candidates {
            let blocker = chosen.iter().copied().find(|&c| net.adjacent(m, c));
            trace.push((m, deg, blocker));
            if blocker.is_none() {
                pick = Some(m);
                break;
            }
        }
        let fallback = pick.is_none();
        let pick = pick.unwrap_or(candidates[0].0);
        chosen.push(pick);
        provenance.push(GroupTrace { group: group.clone(), candidates: trace, chosen: pick, fallback });
    }
    let fallback_used = provenance.iter().any(|t| t.fallback);
    Ok(SelectionResult { groups: ordered, chosen, provenance, fallback_used })
}

/// Network construction, grouping and selection in one call.
pub fn select_features(table: &CentralityTable, delta: f64) -> Result<(FeatureNetwork, SelectionResult)> {
    let net = build_feature_network(table, delta)?;
    let groups = cluster(&net);
    let selection = select_representatives(&net, &groups)?;
    Ok((net, selection))
}

/// Machine-readable summary of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub delta: f64,
    pub metrics: Vec<Metric>,
    pub scc_matrix: Vec<Vec<f64>>,
    pub edges: Vec<(Metric, Metric)>,
    pub groups: Vec<Vec<Metric>>,
    pub chosen: Vec<Metric>,
    pub fallback_used: bool,
}

impl SelectionReport {
    pub fn new(net: &FeatureNetwork, selection: &SelectionResult) -> Self {
        Self {
            delta: net.delta,
            metrics: net.metrics.clone(),
            scc_matrix: net.scc.clone(),
            edges: net.edges.iter().map(|&(a, b)| (net.metrics[a], net.metrics[b])).collect(),
            groups: selection.groups.clone(),
            chosen: selection.chosen.clone(),
            fallback_used: selection.fallback_used,
        }
    }
}

/// How equal raw values are ranked before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankTies {
    /// Lower node id ranks first; every column is a permutation image.
    #[default]
    NodeId,
    /// Tied nodes share their average rank.
    Average,
}

/// Node-feature matrix with one rank-normalized column per chosen metric.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.values.ncols()
    }

    /// CSV with header `node,<feature...>`.
    pub fn write_csv(&self, g: &Graph, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["node".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (u, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = vec![g.name(u).to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a matrix written by [`Self::write_csv`], mapping node labels
    /// through `g`. Every node of `g` must appear exactly once.
    pub fn read_csv(g: &Graph, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let names: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut values = Array2::<f64>::from_elem((g.node_count(), names.len()), f64::NAN);
        let mut filled = vec![false; g.node_count()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let label = rec.get(0).unwrap_or_default();
            let u = g.id_of(label).ok_or_else(|| Error::Parse {
                line: line + 2,
                message: format!("node `{label}` is not in the graph"),
            })?;
            for (j, field) in rec.iter().skip(1).enumerate() {
                values[[u, j]] = field.parse().map_err(|_| Error::Parse {
                    line: line + 2,
                    message: format!("bad number `{field}`"),
                })?;
            }
            filled[u] = true;
        }
        if let Some(u) = filled.iter().position(|f| !f) {
            return Err(Error::Parse { line: 0, message: format!("node `{}` has no feature row", g.name(u)) });
        }
        Ok(Self { names, values })
    }
}

/// Ranks nodes in descending order of each chosen metric and maps rank
/// `R` (1 = largest) to `R / N - 0.5`.
pub fn normalize(table: &CentralityTable, chosen: &[Metric], ties: RankTies) -> Result<FeatureMatrix> {
    let n = table.node_count();
    let mut values = Array2::zeros((n, chosen.len()));
    for (j, &m) in chosen.iter().enumerate() {
        let col = table.column(m).ok_or_else(|| Error::UnknownMetric(format!("{m} is not in the centrality table")))?;
        let ranks: Vec<f64> = match ties {
            RankTies::NodeId => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
                let mut r = vec![0.0; n];
                for (k, &u) in order.iter().enumerate() {
                    r[u] = (k + 1) as f64;
                }
                r
            }
            RankTies::Average => {
                let negated = col.mapv(|x| -x);
                fractional_ranks(negated.view())
            }
        };
        for u in 0..n {
            values[[u, j]] = ranks[u] / n as f64 - 0.5;
        }
    }
    Ok(FeatureMatrix { names: chosen.iter().map(|m| m.name().to_string()).collect(), values })
}
