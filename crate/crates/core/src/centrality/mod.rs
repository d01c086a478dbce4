//! Node centralities: eleven local metrics computable from a node's one- and
//! two-hop neighborhood, and four global metrics that need the whole graph.

mod global;
mod local;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use global::{betweenness, closeness, eigenvector, pagerank};
pub use local::{
    accumulated_degree, conductance_of_egonet, cored_cosine, cored_jaccard, cored_pearson,
    degree, density_of_egonet, extended_degree, local_clustering, node_mass, spa,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Closeness,
    Betweenness,
    PageRank,
    Eigenvector,
    Degree,
    ExtendedDegree,
    AccumulatedDegree,
    NodeMass,
    ConductanceOfEgonet,
    DensityOfEgonet,
    #[serde(rename = "LCC")]
    Lcc,
    CoredCosine,
    CoredJaccard,
    CoredPearson,
    #[serde(rename = "SPA")]
    Spa,
}

impl Metric {
    /// Every metric in canonical column order: global metrics first, then
    /// local ones.
    pub const ALL: [Metric; 15] = [
        Metric::Closeness,
        Metric::Betweenness,
        Metric::PageRank,
        Metric::Eigenvector,
        Metric::Degree,
        Metric::ExtendedDegree,
        Metric::AccumulatedDegree,
        Metric::NodeMass,
        Metric::ConductanceOfEgonet,
        Metric::DensityOfEgonet,
        Metric::Lcc,
        Metric::CoredCosine,
        Metric::CoredJaccard,
        Metric::CoredPearson,
        Metric::Spa,
    ];

    pub fn local() -> impl Iterator<Item = Metric> {
        Self::ALL.into_iter().filter(|m| m.is_local())
    }

    pub fn global() -> impl Iterator<Item = Metric> {
        Self::ALL.into_iter().filter(|m| !m.is_local())
    }

    pub fn is_local(self) -> bool {
        !matches!(self, Metric::Closeness | Metric::Betweenness | Metric::PageRank | Metric::Eigenvector)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Closeness => "Closeness",
            Metric::Betweenness => "Betweenness",
            Metric::PageRank => "PageRank",
            Metric::Eigenvector => "Eigenvector",
            Metric::Degree => "Degree",
            Metric::ExtendedDegree => "ExtendedDegree",
            Metric::AccumulatedDegree => "AccumulatedDegree",
            Metric::NodeMass => "NodeMass",
            Metric::ConductanceOfEgonet => "ConductanceOfEgonet",
            Metric::DensityOfEgonet => "DensityOfEgonet",
            Metric::Lcc => "LCC",
            Metric::CoredCosine => "CoredCosine",
            Metric::CoredJaccard => "CoredJaccard",
            Metric::CoredPearson => "CoredPearson",
            Metric::Spa => "SPA",
        }
    }

    fn position(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).unwrap()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// Case-, space- and punctuation-insensitive, with a few short aliases.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        let m = match key.as_str() {
            "closeness" => Metric::Closeness,
            "betweenness" => Metric::Betweenness,
            "pagerank" => Metric::PageRank,
            "eigenvector" => Metric::Eigenvector,
            "degree" => Metric::Degree,
            "extendeddegree" | "extd" => Metric::ExtendedDegree,
            "accumulateddegree" | "accd" => Metric::AccumulatedDegree,
            "nodemass" => Metric::NodeMass,
            "conductanceofegonet" | "conductance" => Metric::ConductanceOfEgonet,
            "densityofegonet" | "density" => Metric::DensityOfEgonet,
            "lcc" | "localclusteringcoefficient" | "clustering" => Metric::Lcc,
            "coredcosine" => Metric::CoredCosine,
            "coredjaccard" => Metric::CoredJaccard,
            "coredpearson" => Metric::CoredPearson,
            "spa" | "coredspa" => Metric::Spa,
            _ => return Err(Error::UnknownMetric(s.to_string())),
        };
        Ok(m)
    }
}

/// Which columns to compute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricSet {
    Local,
    Global,
    All,
    Explicit(Vec<Metric>),
}

impl MetricSet {
    /// Resolved metrics in canonical order, duplicates removed.
    pub fn metrics(&self) -> Vec<Metric> {
        match self {
            MetricSet::Local => Metric::local().collect(),
            MetricSet::Global => Metric::global().collect(),
            MetricSet::All => Metric::ALL.to_vec(),
            MetricSet::Explicit(list) => {
                let mut v = list.clone();
                v.sort_by_key(|m| m.position());
                v.dedup();
                v
            }
        }
    }
}

impl FromStr for MetricSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" => Ok(MetricSet::Local),
            "global" => Ok(MetricSet::Global),
            "all" => Ok(MetricSet::All),
            _ => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(Metric::from_str)
                .collect::<Result<Vec<_>>>()
                .map(MetricSet::Explicit),
        }
    }
}

/// How the egonet conductance measures set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConductanceVolume {
    /// Sum of degrees.
    #[default]
    Degree,
    /// Number of nodes.
    NodeCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CentralityOptions {
    pub conductance_volume: ConductanceVolume,
    pub pagerank_damping: f64,
    /// L1 change between iterates.
    pub pagerank_tolerance: f64,
    pub pagerank_max_iter: usize,
    /// L2 change between normalized iterates.
    pub eigenvector_tolerance: f64,
    pub eigenvector_max_iter: usize,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self {
            conductance_volume: ConductanceVolume::Degree,
            pagerank_damping: 0.85,
            pagerank_tolerance: 1e-10,
            pagerank_max_iter: 200,
            eigenvector_tolerance: 1e-12,
            eigenvector_max_iter: 1000,
        }
    }
}

/// Raw per-node scores, one column per metric, plus per-metric timings.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    metrics: Vec<Metric>,
    values: Array2<f64>,
    timings: Vec<f64>,
}

impl CentralityTable {
    pub fn new(metrics: Vec<Metric>, values: Array2<f64>) -> Result<Self> {
        if values.ncols() != metrics.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} metrics but {} columns",
                metrics.len(),
                values.ncols()
            )));
        }
        let timings = vec![0.0; metrics.len()];
        Ok(Self { metrics, values, timings })
    }

    pub fn metrics(&self) -> &[Metric] {
        &self.metrics
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, metric: Metric) -> Option<ArrayView1<'_, f64>> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        Some(self.values.column(j))
    }

    /// Wall-clock seconds spent on each metric, aligned with [`Self::metrics`].
    /// A table restricted to `metrics`, in that order, keeping timings.
    pub fn select(&self, metrics: &[Metric]) -> Result<Self> {
        let idx = metrics
            .iter()
            .map(|&m| {
                self.metrics
                    .iter()
                    .position(|&x| x == m)
                    .ok_or_else(|| Error::UnknownMetric(format!("{m} is not in the centrality table")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            metrics: metrics.to_vec(),
            values: self.values.select(ndarray::Axis(1), &idx),
            timings: idx.iter().map(|&j| self.timings[j]).collect(),
        })
    }

    pub fn timings(&self) -> &[f64] {
        &self.timings
    }

    pub fn timing(&self, metric: Metric) -> Option<f64> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        Some(self.timings[j])
    }

    /// CSV with header `node,<metric...>` and one row per node.
    pub fn write_csv(&self, g: &Graph, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["node".to_string()];
        header.extend(self.metrics.iter().map(|m| m.name().to_string()));
        w.write_record(&header)?;
        for (u, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = vec![g.name(u).to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// JSON object `{metric: seconds}`.
    pub fn write_timings_json(&self, path: &Path) -> Result<()> {
        let map: serde_json::Map<String, serde_json::Value> = self
            .metrics
            .iter()
            .zip(&self.timings)
            .map(|(m, t)| (m.name().to_string(), serde_json::json!(t)))
            .collect();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(&mut f, &map)?;
        f.write_all(b"\n").map_err(|e| Error::io(path, e))
    }
}

/// Computes one metric column.
pub fn compute_metric(g: &Graph, metric: Metric, opts: &CentralityOptions) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n < 2 && (metric == Metric::Degree || !metric.is_local()) {
        return Err(Error::DegenerateGraph(format!("{metric} needs at least two nodes, graph has {n}")));
    }
    let col = match metric {
        Metric::Closeness => closeness(g),
        Metric::Betweenness => betweenness(g),
        Metric::PageRank => pagerank(g, opts.pagerank_damping, opts.pagerank_tolerance, opts.pagerank_max_iter),
        Metric::Eigenvector => eigenvector(g, opts.eigenvector_tolerance, opts.eigenvector_max_iter),
        Metric::Degree => degree(g),
        Metric::ExtendedDegree => extended_degree(g),
        Metric::AccumulatedDegree => accumulated_degree(g),
        Metric::NodeMass => node_mass(g),
        Metric::ConductanceOfEgonet => conductance_of_egonet(g, opts.conductance_volume),
        Metric::DensityOfEgonet => density_of_egonet(g),
        Metric::Lcc => local_clustering(g),
        Metric::CoredCosine => cored_cosine(g),
        Metric::CoredJaccard => cored_jaccard(g),
        Metric::CoredPearson => cored_pearson(g),
        Metric::Spa => spa(g),
    };
    Ok(col)
}

pub fn compute(g: &Graph, which: &MetricSet) -> Result<CentralityTable> {
    compute_with(g, which, &CentralityOptions::default())
}

/// Computes the requested columns one metric at a time, timing each.
/// Runs on the calling thread.
pub fn compute_with(g: &Graph, which: &MetricSet, opts: &CentralityOptions) -> Result<CentralityTable> {
    let metrics = which.metrics();
    let n = g.node_count();
    let mut values = Array2::zeros((n, metrics.len()));
    let mut timings = Vec::with_capacity(metrics.len());
    for (j, &m) in metrics.iter().enumerate() {
        let start = Instant::now();
        let col = compute_metric(g, m, opts)?;
        timings.push(start.elapsed().as_secs_f64());
        for (u, x) in col.into_iter().enumerate() {
            values[[u, j]] = x;
        }
    }
    Ok(CentralityTable { metrics, values, timings })
}
