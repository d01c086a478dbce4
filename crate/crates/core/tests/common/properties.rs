//! Randomized invariants shared by the property tests and the acceptance
//! runner. Every runner uses a fixed RNG so failures replay.

use std::collections::BTreeSet;

use infnet_core::centrality::{compute_with, CentralityOptions, CentralityTable, Metric, MetricSet};
use infnet_core::features::{normalize, select_features, spearman, RankTies};
use infnet_core::gcn::{
    beta_for_layer, forward, gcnii_layer_with_beta, log_softmax, loss, loss_and_gradients, shallow_layer, train,
    BetaSchedule, ModelConfig, ModelParameters, StopOn, Variant,
};
use infnet_core::graph::{adjusted_transition, degree_stats, load_edge_list};
use infnet_core::metrics::{accuracy_f1, auc};
use infnet_core::sir::{
    build_dataset, critical_beta, influence_scores, DatasetConfig, InfluenceScores, LabeledDataset, NegativeSampling,
    SirConfig,
};
use infnet_core::{Error, Graph};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles::{column_error, trapezoid_auc, Dense};
use super::{complete, connected_erdos_renyi, cycle, erdos_renyi, hypercube, prism, relabel, ring_lattice};

pub type Property = fn(u32) -> Result<(), String>;

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn graphs(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.5f64, any::<u64>()).prop_map(|(n, p, s)| erdos_renyi(n, p, s))
}

fn connected_graphs(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n, 0.08..0.5f64, any::<u64>()).prop_map(|(n, p, s)| connected_erdos_renyi(n, p, s))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

// graph

pub fn transition_symmetric(cases: u32) -> Result<(), String> {
    check(cases, graphs(40), |g| {
        let dense = adjusted_transition(&g).to_dense();
        prop_assert_eq!(&dense, &dense.t().to_owned());
        Ok(())
    })
}

pub fn transition_row_sums(cases: u32) -> Result<(), String> {
    check(cases, graphs(40), |g| {
        let p = adjusted_transition(&g);
        for u in 0..g.node_count() {
            let du = g.degree(u) as f64 + 1.0;
            let expected = 1.0 / du
                + g.neighbors(u).iter().map(|&v| 1.0 / (du * (g.degree(v) as f64 + 1.0)).sqrt()).sum::<f64>();
            prop_assert!((p.row_sum(u) - expected).abs() <= 1e-12, "row {}: {} vs {}", u, p.row_sum(u), expected);
        }
        Ok(())
    })
}

pub fn edge_list_round_trip(cases: u32) -> Result<(), String> {
    check(cases, graphs(40), |g| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        g.write_edge_list(&path).unwrap();
        let loaded = load_edge_list(&path, &Default::default());
        if g.edge_count() == 0 {
            prop_assert!(loaded.is_err());
            return Ok(());
        }
        let (back, _) = loaded.unwrap();
        let named = |h: &Graph| -> BTreeSet<(String, String)> {
            h.edges()
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (h.name(u).to_string(), h.name(v).to_string());
                    if a < b { (a, b) } else { (b, a) }
                })
                .collect()
        };
        prop_assert_eq!(named(&g), named(&back));
        Ok(())
    })
}

pub fn degree_moments(cases: u32) -> Result<(), String> {
    check(cases, graphs(60), |g| {
        let s = degree_stats(&g);
        prop_assert!(s.mean_degree >= 0.0);
        prop_assert!(s.mean_square_degree >= s.mean_degree * s.mean_degree);
        Ok(())
    })
}

// centrality

pub fn centrality_oracles(cases: u32) -> Result<(), String> {
    check(cases, connected_graphs(40), |g| {
        let table = compute_with(&g, &MetricSet::All, &CentralityOptions::default()).unwrap();
        let dense = Dense::new(&g);
        for m in Metric::ALL {
            let err = column_error(&table.column(m).unwrap().to_vec(), &dense.column(m));
            prop_assert!(err <= 1e-9, "{} off by {:e}", m.name(), err);
        }
        Ok(())
    })
}

pub fn centrality_permutation(cases: u32) -> Result<(), String> {
    check(cases, (graphs(30), any::<u64>()), |(g, seed)| {
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rng(seed));
        let h = relabel(&g, &perm);
        let a = compute_with(&g, &MetricSet::All, &CentralityOptions::default()).unwrap();
        let b = compute_with(&h, &MetricSet::All, &CentralityOptions::default()).unwrap();
        for m in Metric::ALL {
            let col_a = a.column(m).unwrap();
            let col_b = b.column(m).unwrap();
            let moved: Vec<f64> = (0..g.node_count()).map(|u| col_b[perm[u]]).collect();
            let err = column_error(&moved, &col_a.to_vec());
            prop_assert!(err <= 1e-9, "{} not equivariant ({:e})", m.name(), err);
        }
        Ok(())
    })
}

pub fn centrality_vertex_transitive(cases: u32) -> Result<(), String> {
    let family = prop_oneof![
        (3usize..30).prop_map(cycle),
        (2usize..15).prop_map(complete),
        (5usize..30).prop_map(|n| ring_lattice(n, 4)),
        (3usize..15).prop_map(prism),
        (1u32..6).prop_map(hypercube),
    ];
    check(cases, family, |g| {
        let table = compute_with(&g, &MetricSet::All, &CentralityOptions::default()).unwrap();
        for m in Metric::ALL {
            let col = table.column(m).unwrap();
            let constant = vec![col[0]; col.len()];
            let err = column_error(&col.to_vec(), &constant);
            prop_assert!(err <= 1e-9, "{} varies by {:e}", m.name(), err);
        }
        Ok(())
    })
}

// feature selection

fn grid_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-40i32..40).prop_map(|k| k as f64 / 8.0), len)
}

pub fn spearman_symmetric_and_monotone(cases: u32) -> Result<(), String> {
    let pairs = (2usize..40).prop_flat_map(|n| (grid_vector(n), grid_vector(n)));
    check(cases, pairs, |(x, y)| {
        let (x, y) = (Array1::from(x), Array1::from(y));
        let base = spearman(x.view(), y.view()).unwrap();
        prop_assert!((base - spearman(y.view(), x.view()).unwrap()).abs() <= 1e-12);
        prop_assert!(base.abs() <= 1.0 + 1e-12);
        for t in [x.mapv(f64::exp), x.mapv(|v| 3.0 * v + 1.0)] {
            prop_assert!((spearman(t.view(), y.view()).unwrap() - base).abs() <= 1e-12);
            prop_assert!((spearman(y.view(), t.view()).unwrap() - base).abs() <= 1e-12);
        }
        Ok(())
    })
}

/// Local-metric tables whose columns are noisy copies of a few latent
/// signals, so feature networks come out with varied structure.
fn local_tables() -> impl Strategy<Value = CentralityTable> {
    (8usize..60, 1usize..5, 0.0..1.5f64, any::<u64>()).prop_map(|(n, latents, noise, seed)| {
        let mut r = rng(seed);
        let base: Vec<Vec<f64>> = (0..latents).map(|_| (0..n).map(|_| r.random::<f64>()).collect()).collect();
        let metrics: Vec<Metric> = Metric::local().collect();
        let owner: Vec<usize> = metrics.iter().map(|_| r.random_range(0..latents)).collect();
        let values = Array2::from_shape_fn((n, metrics.len()), |(i, j)| {
            let v = base[owner[j]][i] + noise * (((i * 31 + j * 17) as f64).sin() * 0.5 + (j as f64 * 0.37).cos() * 0.1);
            (v * 4.0).round() / 4.0
        });
        CentralityTable::new(metrics, values).unwrap()
    })
}

pub fn feature_network_structure(cases: u32) -> Result<(), String> {
    check(cases, (local_tables(), 0.3..0.99f64), |(table, delta)| {
        let (net, sel) = select_features(&table, delta).unwrap();
        let m = net.metrics.len();
        for i in 0..m {
            prop_assert_eq!(net.scc[i][i], 1.0);
            for j in 0..m {
                prop_assert_eq!(net.scc[i][j], net.scc[j][i]);
                prop_assert!(net.scc[i][j].abs() <= 1.0 + 1e-12);
                if i < j {
                    prop_assert_eq!(net.edges.contains(&(i, j)), net.scc[i][j] > delta);
                }
            }
        }
        let mut members: Vec<Metric> = sel.groups.iter().flatten().copied().collect();
        members.sort();
        let mut expected = net.metrics.clone();
        expected.sort();
        prop_assert_eq!(members, expected);
        prop_assert_eq!(sel.chosen.len(), sel.groups.len());
        for (c, trace) in sel.chosen.iter().zip(&sel.provenance) {
            prop_assert!(trace.group.contains(c));
            prop_assert_eq!(trace.chosen, *c);
        }
        Ok(())
    })
}

pub fn selection_independence(cases: u32) -> Result<(), String> {
    check(cases, (local_tables(), 0.3..0.99f64), |(table, delta)| {
        let (net, sel) = select_features(&table, delta).unwrap();
        for (k, trace) in sel.provenance.iter().enumerate() {
            let blocked = sel.chosen[..k].iter().any(|&c| net.adjacent(c, trace.chosen));
            prop_assert!(!blocked || trace.fallback, "{} adjacent to an earlier pick without fallback", trace.chosen.name());
        }
        prop_assert_eq!(sel.fallback_used, sel.provenance.iter().any(|t| t.fallback));
        Ok(())
    })
}

pub fn selection_deterministic(cases: u32) -> Result<(), String> {
    check(cases, (local_tables(), 0.3..0.99f64), |(table, delta)| {
        let run = |threads| {
            in_pool(threads, || serde_json::to_string(&select_features(&table, delta).unwrap()).unwrap())
        };
        let one = run(1);
        prop_assert_eq!(&one, &run(4));
        prop_assert_eq!(&one, &run(1));
        Ok(())
    })
}

pub fn normalized_columns(cases: u32) -> Result<(), String> {
    check(cases, local_tables(), |table| {
        let n = table.node_count();
        let nf = n as f64;
        let chosen: Vec<Metric> = table.metrics().to_vec();
        for ties in [RankTies::NodeId, RankTies::Average] {
            let fm = normalize(&table, &chosen, ties).unwrap();
            for col in fm.values.columns() {
                let mean = col.sum() / nf;
                prop_assert!((mean - ((nf + 1.0) / (2.0 * nf) - 0.5)).abs() <= 1e-12);
                prop_assert!(col.iter().all(|&v| v >= 1.0 / nf - 0.5 - 1e-15 && v <= 0.5));
                if ties == RankTies::NodeId {
                    let mut sorted = col.to_vec();
                    sorted.sort_by(f64::total_cmp);
                    let expected: Vec<f64> = (1..=n).map(|r| r as f64 / nf - 0.5).collect();
                    prop_assert_eq!(sorted, expected);
                }
            }
        }
        Ok(())
    })
}

// SIR

pub fn sir_monotone_in_beta(cases: u32) -> Result<(), String> {
    let inputs = (any::<u64>(), 0.0..1.0f64, 0.0..1.0f64, 0.2..=1.0f64, any::<u64>());
    check(cases, inputs, |(gseed, b1, b2, gamma, seed)| {
        let g = erdos_renyi(50, 0.08, gseed);
        let (lo, hi) = (b1.min(b2), b1.max(b2));
        let cfg = |b| SirConfig { runs: 10, gamma, seed, beta_override: Some(b), ..Default::default() };
        let a = influence_scores(&g, &cfg(lo)).unwrap();
        let b = influence_scores(&g, &cfg(hi)).unwrap();
        for u in 0..50 {
            prop_assert!(a.ic[u] <= b.ic[u], "node {}: {} at beta {} > {} at beta {}", u, a.ic[u], lo, b.ic[u], hi);
        }
        Ok(())
    })
}

pub fn sir_k2_estimate(cases: u32) -> Result<(), String> {
    check(cases, any::<u64>(), |seed| {
        let g = complete(2);
        let cfg = SirConfig { runs: 1000, seed, beta_override: Some(0.5), ..Default::default() };
        let s = influence_scores(&g, &cfg).unwrap();
        let se = 0.25 / (1000f64).sqrt();
        for ic in s.ic {
            prop_assert!((ic - 0.75).abs() < 4.0 * se, "estimate {}", ic);
        }
        Ok(())
    })
}

pub fn sir_thread_independent(cases: u32) -> Result<(), String> {
    check(cases, (graphs(40), 0.1..=1.0f64, any::<u64>()), |(g, gamma, seed)| {
        let cfg = SirConfig { runs: 8, gamma, seed, ..Default::default() };
        let run = |threads| in_pool(threads, || influence_scores(&g, &cfg));
        match (run(1), run(3)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => return Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
        }
        Ok(())
    })
}

pub fn sir_bounds(cases: u32) -> Result<(), String> {
    check(cases, (graphs(40), 0.0..=1.0f64, 0.1..=1.0f64, any::<u64>()), |(g, beta, gamma, seed)| {
        let cfg = SirConfig { runs: 5, gamma, seed, beta_override: Some(beta), ..Default::default() };
        let s = influence_scores(&g, &cfg).unwrap();
        let floor = 1.0 / g.node_count() as f64;
        prop_assert!(s.ic.iter().all(|&v| v.is_finite() && v >= floor && v <= 1.0));
        Ok(())
    })
}

pub fn critical_beta_positive(cases: u32) -> Result<(), String> {
    check(cases, graphs(60), |g| {
        let stats = degree_stats(&g);
        if let Ok(b) = critical_beta(&stats) {
            prop_assert!(b > 0.0 && b.is_finite());
            let expected = stats.mean_degree / (stats.mean_square_degree - stats.mean_degree);
            prop_assert!((b - expected).abs() <= 1e-12 * expected);
        }
        Ok(())
    })
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

pub fn dataset_partition(cases: u32) -> Result<(), String> {
    let inputs = (
        proptest::collection::vec((1u32..200).prop_map(|k| k as f64 / 200.0), 20..300),
        0.01..0.3f64,
        prop_oneof![(0.5..3.0f64).prop_map(NegativeSampling::Ratio), (0.01..0.5f64).prop_map(NegativeSampling::FractionOfRest)],
        any::<u64>(),
    );
    check(cases, inputs, |(ic, top_fraction, negatives, seed)| {
        let n = ic.len();
        let scores = InfluenceScores { ic: ic.clone(), beta_c: None, beta: 0.1 };
        let cfg = DatasetConfig { top_fraction, negatives, split: 0.7, seed };
        let ds = match build_dataset(&scores, &cfg) {
            Ok(ds) => ds,
            Err(e) => {
                prop_assert!(matches!(e, Error::InsufficientNegatives { .. }), "{}", e);
                return Ok(());
            }
        };
        let pos: BTreeSet<usize> = ds.positives.iter().copied().collect();
        let neg: BTreeSet<usize> = ds.negatives.iter().copied().collect();
        prop_assert!(pos.is_disjoint(&neg));
        let train: BTreeSet<usize> = ds.train.iter().copied().collect();
        let test: BTreeSet<usize> = ds.test.iter().copied().collect();
        prop_assert!(train.is_disjoint(&test));
        let labeled: BTreeSet<usize> = pos.union(&neg).copied().collect();
        prop_assert_eq!(train.union(&test).copied().collect::<BTreeSet<_>>(), labeled);
        prop_assert_eq!(ds.train.len(), round_half_up(0.7 * (pos.len() + neg.len()) as f64));

        let k = ((top_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ic[b].total_cmp(&ic[a]).then(a.cmp(&b)));
        prop_assert_eq!(order[..k].iter().copied().collect::<BTreeSet<_>>(), pos);
        Ok(())
    })
}

// GCN

fn small_config(variant: Variant, layers: usize, width: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        hidden_layers: layers,
        hidden_dim: width,
        seed,
        ..ModelConfig::for_variant(variant)
    }
}

fn variants() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Shallow), Just(Variant::Deep)]
}

pub fn gradient_check(cases: u32) -> Result<(), String> {
    let inputs = (variants(), 1usize..4, 2usize..6, 1usize..4, any::<u64>());
    check(cases, inputs, |(variant, layers, width, features, seed)| {
        let mut r = rng(seed);
        let g = connected_erdos_renyi(10, 0.3, seed);
        let p = adjusted_transition(&g);
        let cfg = small_config(variant, layers, width, seed);
        let x = Array2::from_shape_fn((10, features), |_| r.random::<f64>() - 0.5);
        let labels: Vec<u8> = (0..10).map(|_| r.random_range(0..2)).collect();
        let mask: Vec<usize> = (0..10).filter(|_| r.random::<f64>() < 0.7).collect();
        let mask = if mask.is_empty() { vec![0] } else { mask };
        let mut params = ModelParameters::init(&cfg, features);
        for t in &mut params.tensors {
            t.value.mapv_inplace(|v| v + 0.05 * (r.random::<f64>() - 0.5));
        }
        let (_, grads) = loss_and_gradients(&params, &cfg, &p, x.view(), &labels, &mask, None).unwrap();
        let eval = |q: &ModelParameters| loss(&forward(q, &cfg, &p, x.view(), None).unwrap().log_probs, &labels, &mask).unwrap();
        let central = |k: usize, at: (usize, usize), h: f64| {
            let mut plus = params.clone();
            plus.tensors[k].value[at] += h;
            let mut minus = params.clone();
            minus.tensors[k].value[at] -= h;
            (eval(&plus) - eval(&minus)) / (2.0 * h)
        };
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
        for (k, grad) in grads.iter().enumerate() {
            for (at, &analytic) in grad.indexed_iter() {
                let mut numeric = central(k, at, 1e-4);
                // Disagreement with a tenfold smaller step means the stencil
                // straddles a ReLU kink; shrink it until it lies on one side.
                if rel(numeric, central(k, at, 1e-5)) > 1e-6 {
                    numeric = central(k, at, 1e-6);
                }
                let err = rel(numeric, analytic);
                prop_assert!(err < 1e-4, "{}{:?}: analytic {} numeric {}", params.tensors[k].name, at, analytic, numeric);
            }
        }
        Ok(())
    })
}

pub fn residual_reduces_to_plain(cases: u32) -> Result<(), String> {
    check(cases, (graphs(30), 1usize..8, any::<u64>()), |(g, width, seed)| {
        let mut r = rng(seed);
        let n = g.node_count();
        let p = adjusted_transition(&g);
        let h = Array2::from_shape_fn((n, width), |_| r.random::<f64>() * 4.0 - 2.0);
        let h0 = Array2::from_shape_fn((n, width), |_| r.random::<f64>() * 4.0 - 2.0);
        let w = Array2::from_shape_fn((width, width), |_| r.random::<f64>() * 2.0 - 1.0);
        let residual = gcnii_layer_with_beta(&p, h.view(), h0.view(), w.view(), 0.0, 1.0).unwrap();
        let plain = shallow_layer(&p, h.view(), w.view()).unwrap();
        let diff = (&residual - &plain).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff <= 1e-12, "max difference {:e}", diff);
        Ok(())
    })
}

pub fn log_softmax_stable(cases: u32) -> Result<(), String> {
    let logits = proptest::collection::vec((-1e4..1e4f64, -1e4..1e4f64), 1..50);
    check(cases, logits, |rows| {
        let m = Array2::from_shape_fn((rows.len(), 2), |(i, j)| if j == 0 { rows[i].0 } else { rows[i].1 });
        let out = log_softmax(&m);
        prop_assert!(out.iter().all(|v| v.is_finite() && *v <= 0.0));
        for row in out.rows() {
            prop_assert!((row.mapv(f64::exp).sum() - 1.0).abs() <= 1e-9);
        }
        Ok(())
    })
}

pub fn beta_schedule(cases: u32) -> Result<(), String> {
    check(cases, (0.01..2.0f64, 2usize..200), |(lambda, layers)| {
        let cap = lambda.ln_1p();
        let mut prev = f64::INFINITY;
        for l in 1..=layers {
            let b = beta_for_layer(l, lambda, BetaSchedule::Log);
            prop_assert!(b > 0.0 && b <= cap && b < prev);
            prev = b;
        }
        Ok(())
    })
}

pub fn early_stopping_restores_best(cases: u32) -> Result<(), String> {
    let inputs = (variants(), 12usize..30, any::<u64>(), prop_oneof![Just(StopOn::Test), Just(StopOn::Validation(0.3))]);
    check(cases, inputs, |(variant, n, seed, stop_on)| {
        let mut r = rng(seed);
        let g = connected_erdos_renyi(n, 0.25, seed);
        let p = adjusted_transition(&g);
        let x = Array2::from_shape_fn((n, 3), |_| r.random::<f64>() - 0.5);
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(&mut r);
        let labeled = &nodes[..n * 3 / 4];
        let (mut positives, mut negatives): (Vec<usize>, Vec<usize>) = labeled.iter().partition(|&&u| u % 3 == 0);
        positives.sort_unstable();
        negatives.sort_unstable();
        let cut = labeled.len() * 2 / 3;
        let mut train_set = labeled[..cut].to_vec();
        let mut test_set = labeled[cut..].to_vec();
        train_set.sort_unstable();
        test_set.sort_unstable();
        let ds = LabeledDataset {
            node_count: n,
            positives,
            negatives,
            train: train_set,
            test: test_set,
            config: DatasetConfig::default(),
        };
        let cfg = ModelConfig { max_epochs: 40, patience: 5, stop_on, ..small_config(variant, 2, 4, seed) };
        let (best, trace) = train(&p, x.view(), &ds, &cfg).unwrap();
        let monitored = trace.monitored();
        let first_min = monitored.iter().enumerate().fold(0, |b, (i, &v)| if v < monitored[b] { i } else { b });
        prop_assert_eq!(trace.chosen_epoch, first_min);
        let eval = loss(&forward(&best, &cfg, &p, x.view(), None).unwrap().log_probs, &ds.label_vector(), &ds.test).unwrap();
        prop_assert!((eval - trace.test_loss[trace.chosen_epoch]).abs() <= 1e-12, "{} vs {}", eval, trace.test_loss[trace.chosen_epoch]);
        Ok(())
    })
}

// metrics

fn labeled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..80)
        .prop_flat_map(|n| (grid_vector(n), proptest::collection::vec(0u8..2, n)))
        .prop_filter("both classes", |(_, t)| t.contains(&0) && t.contains(&1))
}

pub fn auc_monotone_invariant(cases: u32) -> Result<(), String> {
    check(cases, labeled_scores(), |(s, t)| {
        let base = auc(&s, &t).unwrap();
        for moved in [s.iter().map(|v| v.exp()).collect::<Vec<_>>(), s.iter().map(|v| 3.0 * v + 1.0).collect()] {
            prop_assert!((auc(&moved, &t).unwrap() - base).abs() <= 1e-12);
        }
        Ok(())
    })
}

pub fn auc_complement(cases: u32) -> Result<(), String> {
    let distinct = (2usize..80).prop_flat_map(|n| {
        (Just(n), any::<u64>(), proptest::collection::vec(0u8..2, n))
    });
    check(cases, distinct.prop_filter("both classes", |(_, _, t)| t.contains(&0) && t.contains(&1)), |(n, seed, t)| {
        let mut s: Vec<f64> = (0..n).map(|i| i as f64).collect();
        s.shuffle(&mut rng(seed));
        let flipped: Vec<u8> = t.iter().map(|&v| 1 - v).collect();
        prop_assert!((auc(&s, &t).unwrap() + auc(&s, &flipped).unwrap() - 1.0).abs() <= 1e-12);
        Ok(())
    })
}

pub fn auc_matches_trapezoid(cases: u32) -> Result<(), String> {
    check(cases, labeled_scores(), |(s, t)| {
        prop_assert!((auc(&s, &t).unwrap() - trapezoid_auc(&s, &t)).abs() <= 1e-12);
        Ok(())
    })
}

pub fn accuracy_and_f1(cases: u32) -> Result<(), String> {
    let pairs = (1usize..80).prop_flat_map(|n| (proptest::collection::vec(0u8..2, n), proptest::collection::vec(0u8..2, n)));
    check(cases, pairs, |(pred, truth)| {
        let (acc, f1, c) = accuracy_f1(&pred, &truth).unwrap();
        let count = |p: u8, t: u8| pred.iter().zip(&truth).filter(|&(&a, &b)| a == p && b == t).count();
        prop_assert_eq!((c.tp, c.fp, c.tn, c.fn_), (count(1, 1), count(1, 0), count(0, 0), count(0, 1)));
        prop_assert_eq!(acc, (c.tp + c.tn) as f64 / pred.len() as f64);
        let precision = if c.tp + c.fp == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fp) as f64 };
        let recall = if c.tp + c.fn_ == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fn_) as f64 };
        let expected = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        prop_assert!((f1 - expected).abs() <= 1e-12);
        Ok(())
    })
}

pub const ALL: &[(&str, Property)] = &[
    ("transition_symmetric", transition_symmetric),
    ("transition_row_sums", transition_row_sums),
    ("edge_list_round_trip", edge_list_round_trip),
    ("degree_moments", degree_moments),
    ("centrality_oracles", centrality_oracles),
    ("centrality_permutation", centrality_permutation),
    ("centrality_vertex_transitive", centrality_vertex_transitive),
    ("spearman_symmetric_and_monotone", spearman_symmetric_and_monotone),
    ("feature_network_structure", feature_network_structure),
    ("selection_independence", selection_independence),
    ("selection_deterministic", selection_deterministic),
    ("normalized_columns", normalized_columns),
    ("sir_monotone_in_beta", sir_monotone_in_beta),
    ("sir_k2_estimate", sir_k2_estimate),
    ("sir_thread_independent", sir_thread_independent),
    ("sir_bounds", sir_bounds),
    ("critical_beta_positive", critical_beta_positive),
    ("dataset_partition", dataset_partition),
    ("gradient_check", gradient_check),
    ("residual_reduces_to_plain", residual_reduces_to_plain),
    ("log_softmax_stable", log_softmax_stable),
    ("beta_schedule", beta_schedule),
    ("early_stopping_restores_best", early_stopping_restores_best),
    ("auc_monotone_invariant", auc_monotone_invariant),
    ("auc_complement", auc_complement),
    ("auc_matches_trapezoid", auc_matches_trapezoid),
    ("accuracy_and_f1", accuracy_and_f1),
];
