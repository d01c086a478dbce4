//! Influential-node identification on undirected networks.
//!
//! The pipeline computes local and global centralities for every node,
//! selects a non-redundant subset of local centralities through a
//! Spearman-correlation feature network, labels nodes by Monte-Carlo SIR
//! spreading, and trains a graph convolutional classifier on the result.
//!
//! Module map:
//!
//! - [`graph`]: edge-list ingestion, degree statistics, and the normalized
//!   propagation matrix consumed by the GCN.
//! - [`centrality`]: the eleven local and four global centralities.
//! - [`features`]: Spearman correlation, feature network, grouping,
//!   representative selection and rank normalization.
//! - [`sir`]: influence scoring and balanced dataset construction.
//! - [`gcn`]: shallow and initial-residual deep GCNs with Adam training.
//! - [`metrics`]: accuracy, F1 and ROC-AUC.
//! - [`harness`]: end-to-end runs, ablations and the timing benchmark.

pub mod centrality;
pub mod error;
pub mod features;
pub mod gcn;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod sir;

pub use error::{Error, Result, Stage};
pub use graph::Graph;
