use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::centrality::{compute_with, CentralityOptions, MetricSet};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Wall-clock seconds to compute each centrality group on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub network: String,
    pub all: f64,
    pub global: f64,
    pub local: f64,
}

/// Times `which` on the calling thread, one metric at a time. `local` and
/// `global` sum the per-metric timings of each group and `all` is the
/// total; a group with no requested metric takes zero seconds.
pub fn timing_benchmark(g: &Graph, network: &str, which: &MetricSet, opts: &CentralityOptions) -> Result<TimingRow> {
    let table = compute_with(g, which, opts)?;
    let (mut local, mut global) = (0.0, 0.0);
    for (m, &s) in table.metrics().iter().zip(table.timings()) {
        if m.is_local() {
            local += s;
        } else {
            global += s;
        }
    }
    Ok(TimingRow { network: network.to_string(), all: local + global, global, local })
}

/// CSV with header `network,all,global,local`.
pub fn write_timing_csv(rows: &[TimingRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
