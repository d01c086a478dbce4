//! Undirected simple graphs, edge-list I/O, and the normalized propagation
//! matrix `D̃^{-1/2} (A + I) D̃^{-1/2}` used by the GCN layers.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Immutable undirected simple graph with contiguous node ids `0..n`.
///
/// Adjacency is stored in CSR form with each neighbor list sorted
/// ascending. Original node labels from the edge list are kept so that
/// outputs can be written back with the caller's names.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edges: Vec<(usize, usize)>,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// Counts of lines that did not turn into edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines: usize,
    pub edges: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub comment_prefixes: Vec<char>,
    /// `None` splits on any run of whitespace.
    pub delimiter: Option<char>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { comment_prefixes: vec!['#', '%'], delimiter: None }
    }
}

impl Graph {
    /// Builds a graph over `n` nodes named `"0".."n-1"`.
    ///
    /// Self-loops and duplicate edges (in either orientation) are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        let mut report = IngestReport::default();
        let edges = dedup_edges(edges, &mut report);
        if let Some(&(_, v)) = edges.iter().find(|&&(_, v)| v >= n) {
            return Err(Error::DimensionMismatch(format!("edge endpoint {v} outside 0..{n}")));
        }
        Self::assemble(names, edges)
    }

    fn assemble(names: Vec<String>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        edges.sort_unstable();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        for &(u, v) in &edges {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for u in 0..n {
            targets[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { offsets, targets, edges, names, index })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Position of `u`'s first neighbor in the flattened adjacency array.
    /// Directed edge `(u, neighbors(u)[k])` has slot `adjacency_offset(u) + k`.
    pub fn adjacency_offset(&self, u: usize) -> usize {
        self.offsets[u]
    }

    /// Number of directed adjacency slots, `2 |E|`.
    pub fn adjacency_len(&self) -> usize {
        self.targets.len()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|u| self.degree(u)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn name(&self, u: usize) -> &str {
        &self.names[u]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// SHA-256 over the node count and the sorted edge list.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.node_count() as u64).to_le_bytes());
        for &(u, v) in &self.edges {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Writes one `name name` line per edge.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for &(u, v) in &self.edges {
            writeln!(w, "{} {}", self.names[u], self.names[v]).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn dedup_edges(
    edges: impl IntoIterator<Item = (usize, usize)>,
    report: &mut IngestReport,
) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (a, b) in edges {
        if a == b {
            report.self_loops += 1;
            continue;
        }
        let e = (a.min(b), a.max(b));
        if seen.insert(e) {
            out.push(e);
        } else {
            report.duplicates += 1;
        }
    }
    report.edges = out.len();
    out
}

/// Reads an edge list. Node ids follow first appearance in the file.
pub fn load_edge_list(path: &Path, options: &LoadOptions) -> Result<(Graph, IngestReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<(Graph, IngestReport)> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut raw = Vec::new();
    let mut report = IngestReport::default();

    let mut intern = |tok: &str, names: &mut Vec<String>| -> usize {
        *index.entry(tok.to_string()).or_insert_with(|| {
            names.push(tok.to_string());
            names.len() - 1
        })
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(|c| options.comment_prefixes.contains(&c)) {
            continue;
        }
        report.lines += 1;
        let mut tokens: Box<dyn Iterator<Item = &str>> = match options.delimiter {
            Some(d) => Box::new(trimmed.split(d).map(str::trim).filter(|t| !t.is_empty())),
            None => Box::new(trimmed.split_whitespace()),
        };
        let (Some(a), Some(b)) = (tokens.next(), tokens.next()) else {
            return Err(Error::Parse { line: i + 1, message: format!("expected two node tokens, got `{trimmed}`") });
        };
        let a = intern(a, &mut names);
        let b = intern(b, &mut names);
        raw.push((a, b));
    }

    let edges = dedup_edges(raw, &mut report);
    let graph = Graph::assemble(names, edges)?;
    Ok((graph, report))
}

/// `⟨d⟩` and `⟨d²⟩` over all nodes, with the exact integer sums behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub mean_degree: f64,
    pub mean_square_degree: f64,
    pub degree_sum: u64,
    pub square_sum: u64,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let n = g.node_count() as f64;
    let (s1, s2) = (0..g.node_count()).fold((0u64, 0u64), |(a, b), u| {
        let d = g.degree(u) as u64;
        (a + d, b + d * d)
    });
    DegreeStats { mean_degree: s1 as f64 / n, mean_square_degree: s2 as f64 / n, degree_sum: s1, square_sum: s2 }
}

/// Sparse symmetric matrix `P̃ = D̃^{-1/2} (A + I) D̃^{-1/2}`.
///
/// Row `u` holds the diagonal entry and one entry per neighbor, columns
/// ascending.
#[derive(Debug, Clone)]
pub struct AdjustedTransition {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

pub fn adjusted_transition(g: &Graph) -> AdjustedTransition {
    let n = g.node_count();
    let scale: Vec<f64> = (0..n).map(|u| (g.degree(u) + 1) as f64).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n + g.adjacency_len());
    let mut values = Vec::with_capacity(n + g.adjacency_len());
    offsets.push(0);
    for u in 0..n {
        let mut placed_self = false;
        for &v in g.neighbors(u) {
            if !placed_self && v > u {
                cols.push(u);
                values.push(1.0 / (scale[u] * scale[u]).sqrt());
                placed_self = true;
            }
            cols.push(v);
            values.push(1.0 / (scale[u] * scale[v]).sqrt());
        }
        if !placed_self {
            cols.push(u);
            values.push(1.0 / (scale[u] * scale[u]).sqrt());
        }
        offsets.push(cols.len());
    }
    AdjustedTransition { offsets, cols, values }
}

impl AdjustedTransition {
    pub fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let r = self.offsets[u]..self.offsets[u + 1];
        match self.cols[r.clone()].binary_search(&v) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, u: usize) -> f64 {
        self.row(u).map(|(_, x)| x).sum()
    }

    /// Sparse-dense product `P̃ H`. Because `P̃` is symmetric this is also
    /// the transpose product used in backpropagation.
    pub fn apply(&self, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if h.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "propagation matrix is {0}x{0} but activations have {1} rows",
                self.dim(),
                h.nrows()
            )));
        }
        let mut out = Array2::<f64>::zeros((h.nrows(), h.ncols()));
        for (u, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (v, w) in self.row(u) {
                out_row.scaled_add(w, &h.row(v));
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for u in 0..n {
            for (v, w) in self.row(u) {
                m[[u, v]] = w;
            }
        }
        m
    }
}
