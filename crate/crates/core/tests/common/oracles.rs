//! Brute-force reference implementations over a dense adjacency matrix.

use std::collections::BTreeSet;

use infnet_core::centrality::Metric;
use infnet_core::Graph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

const INF: usize = usize::MAX / 4;

pub struct Dense {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Dense {
    pub fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in g.edges() {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Self { n, adj }
    }

    fn nbrs(&self, u: usize) -> BTreeSet<usize> {
        (0..self.n).filter(|&v| self.adj[u][v]).collect()
    }

    fn deg(&self, u: usize) -> usize {
        self.nbrs(u).len()
    }

    fn closed(&self, u: usize) -> BTreeSet<usize> {
        let mut s = self.nbrs(u);
        s.insert(u);
        s
    }

    fn edges_within(&self, set: &BTreeSet<usize>) -> usize {
        let mut c = 0;
        for &a in set {
            for &b in set {
                if a < b && self.adj[a][b] {
                    c += 1;
                }
            }
        }
        c
    }

    fn volume(&self, set: &BTreeSet<usize>) -> usize {
        set.iter().map(|&v| self.deg(v)).sum()
    }

    pub fn distances(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut d = vec![vec![INF; n]; n];
        for u in 0..n {
            d[u][u] = 0;
            for v in 0..n {
                if self.adj[u][v] {
                    d[u][v] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    /// Number of shortest paths between every ordered pair, by dynamic
    /// programming over the distance matrix.
    fn path_counts(&self, d: &[Vec<usize>]) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut sigma = vec![vec![0.0; n]; n];
        for s in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&v| d[s][v] < INF).collect();
            order.sort_by_key(|&v| d[s][v]);
            for &v in &order {
                sigma[s][v] = if v == s {
                    1.0
                } else {
                    (0..n).filter(|&u| self.adj[u][v] && d[s][u] + 1 == d[s][v]).map(|u| sigma[s][u]).sum()
                };
            }
        }
        sigma
    }

    pub fn column(&self, metric: Metric) -> Vec<f64> {
        let n = self.n;
        let all = 0..n;
        match metric {
            Metric::Degree => all.map(|u| self.deg(u) as f64 / (n - 1) as f64).collect(),
            Metric::ExtendedDegree => {
                all.map(|u| (self.deg(u) + self.nbrs(u).iter().map(|&v| self.deg(v)).sum::<usize>()) as f64).collect()
            }
            Metric::AccumulatedDegree => all
                .map(|u| {
                    let mut total = self.deg(u);
                    for v in self.nbrs(u) {
                        total += self.deg(v);
                        for w in self.nbrs(v) {
                            total += self.deg(w);
                        }
                    }
                    total as f64
                })
                .collect(),
            Metric::NodeMass => all.map(|u| self.edges_within(&self.closed(u)) as f64).collect(),
            Metric::DensityOfEgonet => all
                .map(|u| {
                    let k = self.closed(u).len();
                    if k < 2 {
                        0.0
                    } else {
                        self.edges_within(&self.closed(u)) as f64 / (k * (k - 1) / 2) as f64
                    }
                })
                .collect(),
            Metric::Lcc => all
                .map(|u| {
                    let k = self.deg(u);
                    if k < 2 {
                        0.0
                    } else {
                        self.edges_within(&self.nbrs(u)) as f64 / (k * (k - 1) / 2) as f64
                    }
                })
                .collect(),
            Metric::ConductanceOfEgonet => all
                .map(|u| {
                    let inside = self.closed(u);
                    let outside: BTreeSet<usize> = (0..n).filter(|v| !inside.contains(v)).collect();
                    let cut = inside.iter().flat_map(|&a| outside.iter().map(move |&b| (a, b))).filter(|&(a, b)| self.adj[a][b]).count();
                    let denom = self.volume(&inside).min(self.volume(&outside));
                    if denom == 0 {
                        0.0
                    } else {
                        cut as f64 / denom as f64
                    }
                })
                .collect(),
            Metric::CoredCosine => self.neighbor_sum(|a, b| {
                let c = a.intersection(b).count() as f64;
                c / ((a.len() * b.len()) as f64).sqrt()
            }),
            Metric::CoredJaccard => {
                self.neighbor_sum(|a, b| a.intersection(b).count() as f64 / a.union(b).count() as f64)
            }
            Metric::CoredPearson => self.neighbor_sum(|a, b| {
                let row = |s: &BTreeSet<usize>| (0..n).map(|k| if s.contains(&k) { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
                let (x, y) = (row(a), row(b));
                let mx = x.iter().sum::<f64>() / n as f64;
                let my = y.iter().sum::<f64>() / n as f64;
                let cov: f64 = x.iter().zip(&y).map(|(p, q)| (p - mx) * (q - my)).sum();
                let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
                let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
                if vx <= 1e-12 || vy <= 1e-12 {
                    0.0
                } else {
                    cov / (vx * vy).sqrt()
                }
            }),
            Metric::Spa => self.neighbor_sum(|a, b| (a.len() * b.len()) as f64),
            Metric::Closeness => {
                let d = self.distances();
                all.map(|u| {
                    let reach: Vec<usize> = (0..n).filter(|&v| v != u && d[u][v] < INF).collect();
                    if reach.is_empty() {
                        return 0.0;
                    }
                    let total: usize = reach.iter().map(|&v| d[u][v]).sum();
                    let r = reach.len() as f64;
                    (r / total as f64) * (r / (n - 1) as f64)
                })
                .collect()
            }
            Metric::Betweenness => {
                let d = self.distances();
                let sigma = self.path_counts(&d);
                all.map(|v| {
                    let mut b = 0.0;
                    for s in 0..n {
                        for t in s + 1..n {
                            if s == v || t == v || d[s][t] >= INF {
                                continue;
                            }
                            if d[s][v] + d[v][t] == d[s][t] {
                                b += sigma[s][v] * sigma[v][t] / sigma[s][t];
                            }
                        }
                    }
                    b
                })
                .collect()
            }
            Metric::PageRank => {
                // (I - α M) x = (1-α)/n · 1 with dangling columns spread uniformly.
                let alpha = 0.85;
                let m = DMatrix::from_fn(n, n, |i, j| {
                    let dj = self.deg(j);
                    if dj == 0 {
                        1.0 / n as f64
                    } else if self.adj[i][j] {
                        1.0 / dj as f64
                    } else {
                        0.0
                    }
                });
                let a = DMatrix::identity(n, n) - m * alpha;
                let b = DVector::from_element(n, (1.0 - alpha) / n as f64);
                let x = a.lu().solve(&b).expect("pagerank system is nonsingular");
                x.iter().copied().collect()
            }
            Metric::Eigenvector => {
                let a = DMatrix::from_fn(n, n, |i, j| if self.adj[i][j] { 1.0 } else { 0.0 });
                let eig = SymmetricEigen::new(a);
                let top = eig.eigenvalues.imax();
                let v = eig.eigenvectors.column(top);
                let norm = v.norm();
                v.iter().map(|x: &f64| x.abs() / norm).collect()
            }
        }
    }

    fn neighbor_sum(&self, sim: impl Fn(&BTreeSet<usize>, &BTreeSet<usize>) -> f64) -> Vec<f64> {
        (0..self.n)
            .map(|u| {
                let nu = self.nbrs(u);
                nu.iter().map(|&v| sim(&nu, &self.nbrs(v))).sum()
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let d = self.distances();
        d[0].iter().all(|&x| x < INF)
    }
}

/// Largest error relative to the column's scale; exact zeros compare
/// absolutely.
pub fn column_error(actual: &[f64], expected: &[f64]) -> f64 {
    let scale = expected.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    actual.iter().zip(expected).map(|(a, e)| (a - e).abs() / scale).fold(0.0, f64::max)
}

/// ROC area by sweeping thresholds and integrating with the trapezoid rule.
pub fn trapezoid_auc(scores: &[f64], truth: &[u8]) -> f64 {
    let pos = truth.iter().filter(|&&t| t == 1).count() as f64;
    let neg = truth.len() as f64 - pos;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut prev_tp, mut prev_fp, mut area) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if truth[idx[i]] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        area += (fp - prev_fp) / neg * (tp + prev_tp) / (2.0 * pos);
        prev_tp = tp;
        prev_fp = fp;
    }
    area
}
