use std::collections::VecDeque;

use crate::graph::Graph;

/// Closeness restricted to each node's reachable set, scaled by the
/// reachable fraction (Wasserman–Faust): `((r-1)/Σdist) · ((r-1)/(n-1))`.
pub fn closeness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut seen = Vec::with_capacity(n);
    (0..n)
        .map(|s| {
            dist[s] = 0;
            queue.push_back(s);
            seen.push(s);
            let mut total = 0usize;
            while let Some(v) = queue.pop_front() {
                total += dist[v];
                for &w in g.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                        seen.push(w);
                    }
                }
            }
            let reached = seen.len();
            for v in seen.drain(..) {
                dist[v] = usize::MAX;
            }
            if total == 0 {
                return 0.0;
            }
            let r1 = (reached - 1) as f64;
            (r1 / total as f64) * (r1 / (n - 1) as f64)
        })
        .collect()
}

/// Brandes' algorithm. Each unordered pair `{s, t}` contributes
/// `σ_st(v) / σ_st` once; endpoints are excluded.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut centrality = vec![0.0f64; n];
    let mut stack = Vec::with_capacity(n);
    let mut dist = vec![-1i64; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        // predecessors are recovered from distances instead of stored lists
        while let Some(w) = stack.pop() {
            for &v in g.neighbors(w) {
                if dist[v] == dist[w] - 1 {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
        for v in 0..n {
            if dist[v] >= 0 {
                dist[v] = -1;
                sigma[v] = 0.0;
                delta[v] = 0.0;
            }
        }
    }
    // every unordered pair was visited from both ends
    for c in &mut centrality {
        *c /= 2.0;
    }
    centrality
}

/// Power iteration for `PR = (1-α)/n + α (Σ_{v∈N(u)} PR(v)/d_v + dangling/n)`.
/// Mass on isolated nodes is spread uniformly so the column sums to one.
pub fn pagerank(g: &Graph, damping: f64, tolerance: f64, max_iter: usize) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for iter in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&u| g.degree(u) == 0).map(|u| rank[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (u, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g.neighbors(u).iter().map(|&v| rank[v] / g.degree(v) as f64).sum();
            *slot = base + damping * inflow;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < tolerance {
            log::trace!("pagerank converged after {} iterations", iter + 1);
            return rank;
        }
    }
    log::warn!("pagerank did not reach tolerance {tolerance} in {max_iter} iterations");
    rank
}

/// Principal eigenvector of `A` by power iteration on `A + I`, starting
/// from the uniform vector and L2-normalized. The identity shift keeps
/// bipartite graphs from oscillating without changing the eigenvectors.
pub fn eigenvector(g: &Graph, tolerance: f64, max_iter: usize) -> Vec<f64> {
    let n = g.node_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        for (u, slot) in next.iter_mut().enumerate() {
            *slot = x[u] + g.neighbors(u).iter().map(|&v| x[v]).sum::<f64>();
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        next.iter_mut().for_each(|a| *a /= norm);
        let change = x.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut next);
        if change < tolerance {
            return x;
        }
    }
    log::warn!("eigenvector centrality did not reach tolerance {tolerance} in {max_iter} iterations; using last iterate");
    x
}
