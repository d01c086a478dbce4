use crate::graph::Graph;

use super::ConductanceVolume;

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Per node, the neighbor-list overlap `|N(u) ∩ N(v)|` for each neighbor `v`,
/// aligned with `g.neighbors(u)`.
fn common_neighbor_counts(g: &Graph, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let nu = g.neighbors(u);
    nu.iter().map(move |&v| (v, sorted_intersection(nu, g.neighbors(v))))
}

/// Edges among the open neighborhood of each node.
fn triangles(g: &Graph) -> Vec<usize> {
    (0..g.node_count())
        .map(|u| common_neighbor_counts(g, u).map(|(_, c)| c).sum::<usize>() / 2)
        .collect()
}

/// `degree(u) / (n - 1)`. Callers guarantee `n >= 2`.
pub fn degree(g: &Graph) -> Vec<f64> {
    let denom = (g.node_count() - 1) as f64;
    (0..g.node_count()).map(|u| g.degree(u) as f64 / denom).collect()
}

/// `d_u + Σ_{v ∈ N(u)} d_v`.
pub fn extended_degree(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .map(|u| (g.degree(u) + g.neighbors(u).iter().map(|&v| g.degree(v)).sum::<usize>()) as f64)
        .collect()
}

/// `d_u + Σ_{v ∈ N(u)} (d_v + Σ_{w ∈ N(v)} d_w)`; the inner term is the
/// extended degree of `v`.
pub fn accumulated_degree(g: &Graph) -> Vec<f64> {
    let extd = extended_degree(g);
    (0..g.node_count())
        .map(|u| g.degree(u) as f64 + g.neighbors(u).iter().map(|&v| extd[v]).sum::<f64>())
        .collect()
}

/// Edges inside the closed neighborhood `N⁺(u)`.
pub fn node_mass(g: &Graph) -> Vec<f64> {
    triangles(g).into_iter().enumerate().map(|(u, t)| (g.degree(u) + t) as f64).collect()
}

/// Node mass over `C(d_u + 1, 2)`; zero for isolated nodes.
pub fn density_of_egonet(g: &Graph) -> Vec<f64> {
    triangles(g)
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            let d = g.degree(u);
            if d == 0 {
                0.0
            } else {
                (d + t) as f64 / ((d + 1) * d / 2) as f64
            }
        })
        .collect()
}

/// Local clustering coefficient; zero when `d_u < 2`.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    triangles(g)
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            let d = g.degree(u);
            if d < 2 {
                0.0
            } else {
                t as f64 / (d * (d - 1) / 2) as f64
            }
        })
        .collect()
}

/// Boundary edges of `N⁺(u)` over the smaller side's volume. Zero when the
/// denominator vanishes (for example when the egonet covers the graph).
pub fn conductance_of_egonet(g: &Graph, volume: ConductanceVolume) -> Vec<f64> {
    let total_volume = 2 * g.edge_count();
    let n = g.node_count();
    triangles(g)
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            let d = g.degree(u);
            let inside = d + t;
            let ego_volume = d + g.neighbors(u).iter().map(|&v| g.degree(v)).sum::<usize>();
            let boundary = ego_volume - 2 * inside;
            let denom = match volume {
                ConductanceVolume::Degree => ego_volume.min(total_volume - ego_volume),
                ConductanceVolume::NodeCount => (d + 1).min(n - d - 1),
            };
            if denom == 0 {
                0.0
            } else {
                boundary as f64 / denom as f64
            }
        })
        .collect()
}

fn core_dominance(g: &Graph, sim: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
    (0..g.node_count())
        .map(|u| common_neighbor_counts(g, u).map(|(v, c)| sim(u, v, c)).sum())
        .collect()
}

/// `Σ_{v ∈ N(u)} |N(u) ∩ N(v)| / sqrt(d_u d_v)`.
pub fn cored_cosine(g: &Graph) -> Vec<f64> {
    core_dominance(g, |u, v, c| c as f64 / ((g.degree(u) * g.degree(v)) as f64).sqrt())
}

/// `Σ_{v ∈ N(u)} |N(u) ∩ N(v)| / |N(u) ∪ N(v)|`.
pub fn cored_jaccard(g: &Graph) -> Vec<f64> {
    core_dominance(g, |u, v, c| c as f64 / (g.degree(u) + g.degree(v) - c) as f64)
}

/// Sum over neighbors of the Pearson correlation between adjacency rows.
///
/// With row means `d/n`, the covariance sum is `c - d_u d_v / n` and each
/// variance sum is `d - d² / n`.
pub fn cored_pearson(g: &Graph) -> Vec<f64> {
    let n = g.node_count() as f64;
    core_dominance(g, |u, v, c| {
        let (du, dv) = (g.degree(u) as f64, g.degree(v) as f64);
        let var_u = du - du * du / n;
        let var_v = dv - dv * dv / n;
        if var_u <= 0.0 || var_v <= 0.0 {
            return 0.0;
        }
        (c as f64 - du * dv / n) / (var_u * var_v).sqrt()
    })
}

/// `Σ_{v ∈ N(u)} d_u d_v`.
pub fn spa(g: &Graph) -> Vec<f64> {
    core_dominance(g, |u, v, _| (g.degree(u) * g.degree(v)) as f64)
}
