use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infnet_core::centrality::{compute_with, CentralityOptions, ConductanceVolume, MetricSet};
use infnet_core::features::{normalize, select_features, FeatureMatrix, RankTies, SelectionReport, DEFAULT_DELTA};
use infnet_core::gcn::{load_checkpoint, predict, save_checkpoint, train, BetaSchedule, StopOn, Variant};
use infnet_core::graph::{adjusted_transition, load_edge_list, Graph, LoadOptions};
use infnet_core::harness::{
    ablate_depth, ablate_features, ablate_leave_one_out, run_pipeline, timing_benchmark, write_timing_csv,
    ExperimentConfig, FeatureMode, ModelSpec,
};
use infnet_core::metrics::evaluate;
use infnet_core::sir::{build_dataset, influence_scores, DatasetConfig, InfluenceScores, LabeledDataset, NegativeSampling, SirConfig};
use infnet_core::{Error, Stage};

#[derive(Parser)]
#[command(name = "infnet", version, about = "Identify influential nodes with centrality features and graph convolutions")]
struct Cli {
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Whitespace-separated edge list.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VolumeArg {
    Degree,
    NodeCount,
}

#[derive(Args)]
struct SirArgs {
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 2.0)]
    xi: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Infection rate to use instead of xi times the critical rate.
    #[arg(long)]
    beta: Option<f64>,
}

impl SirArgs {
    fn config(&self) -> SirConfig {
        SirConfig { runs: self.runs, xi: self.xi, gamma: self.gamma, seed: self.seed, beta_override: self.beta }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Number of graph-convolution layers.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Use beta = lambda / layer instead of ln(lambda / layer + 1).
    #[arg(long)]
    linear_beta: bool,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    weight_decay_fc: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    model_seed: Option<u64>,
    /// Early-stop on this fraction of training nodes instead of the test set.
    #[arg(long)]
    validation_fraction: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Shallow,
    Deep,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec {
            variant: self.variant.map(|v| match v {
                VariantArg::Shallow => Variant::Shallow,
                VariantArg::Deep => Variant::Deep,
            }),
            hidden_layers: self.layers,
            hidden_dim: self.hidden_dim,
            alpha: self.alpha,
            lambda: self.lambda,
            beta_schedule: self.linear_beta.then_some(BetaSchedule::Linear),
            dropout: self.dropout,
            learning_rate: self.lr,
            weight_decay_hidden: self.weight_decay,
            weight_decay_fc: self.weight_decay_fc,
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed: self.model_seed,
            stop_on: self.validation_fraction.map(StopOn::Validation),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute centrality columns (`centralities.csv`, `timings.json`).
    Centrality {
        #[command(flatten)]
        graph: GraphArg,
        /// `all`, `local`, `global`, or a comma-separated list.
        #[arg(long, default_value = "all")]
        metrics: String,
        #[arg(long, value_enum, default_value = "degree")]
        conductance_volume: VolumeArg,
    },
    /// Build the feature network over local centralities and pick features
    /// (`selection.json`, `features.csv`).
    FeatureNet {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Give tied nodes their average rank when normalizing.
        #[arg(long)]
        average_ties: bool,
    },
    /// Monte-Carlo SIR influence scores (`ic.csv`).
    SirLabel {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        sir: SirArgs,
    },
    /// Label and split nodes from influence scores (`dataset.json`).
    Dataset {
        #[command(flatten)]
        graph: GraphArg,
        /// Scores CSV written by `sir-label`.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        top_fraction: f64,
        /// Negatives per positive.
        #[arg(long, default_value_t = 2.0)]
        neg_ratio: f64,
        /// Sample this fraction of the remaining nodes as negatives instead.
        #[arg(long, conflicts_with = "neg_ratio")]
        neg_fraction: Option<f64>,
        #[arg(long, default_value_t = 0.7)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a classifier (`model.json`, `trace.json`, `metrics.json`).
    Train {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Classify every node with a trained model (`predictions.csv`).
    Predict {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Ablation studies driven by a TOML experiment config.
    Ablate {
        #[command(subcommand)]
        study: Study,
    },
    /// Time local and global centralities on one thread (`timing.csv`).
    BenchTiming {
        #[command(flatten)]
        graph: GraphArg,
        /// Network label for the CSV row; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the full pipeline from a TOML experiment config (`record.json`).
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum Study {
    /// Sweep the number of deep-model layers.
    Depth {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated depths; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
    },
    /// Compare feature sets.
    Features {
        #[arg(long)]
        config: PathBuf,
        /// Feature modes separated by `;`; defaults to the config's list.
        #[arg(long, value_delimiter = ';')]
        modes: Option<Vec<String>>,
    },
    /// Drop each selected feature in turn.
    Loo {
        #[arg(long)]
        config: PathBuf,
    },
}

type Outcome = Result<(), Error>;

trait Tag<T> {
    fn at(self, stage: Stage) -> Result<T, Error>;
}

impl<T> Tag<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, Error> {
        self.map_err(|e| e.at(stage))
    }
}

fn load_graph(path: &Path) -> Result<Graph, Error> {
    let (g, report) = load_edge_list(path, &LoadOptions::default()).at(Stage::Load)?;
    if report.self_loops + report.duplicates > 0 {
        log::info!("dropped {} self-loops and {} duplicate edges", report.self_loops, report.duplicates);
    }
    Ok(g)
}

fn out_dir(dir: &Path) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
        .at(Stage::Persist)?;
    Ok(dir.to_path_buf())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(Error::from).at(Stage::Persist)?;
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e }).at(Stage::Persist)
}

fn load_config(path: &Path, out: &Path, override_out: bool) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path).at(Stage::Config)?;
    if override_out {
        cfg.out_dir = out.to_path_buf();
    }
    Ok(cfg)
}

fn run(cli: Cli, out_given: bool) -> Outcome {
    let out = &cli.out_dir;
    match cli.command {
        Command::Centrality { graph, metrics, conductance_volume } => {
            let g = load_graph(&graph.graph)?;
            let which: MetricSet = metrics.parse().at(Stage::Config)?;
            let opts = CentralityOptions {
                conductance_volume: match conductance_volume {
                    VolumeArg::Degree => ConductanceVolume::Degree,
                    VolumeArg::NodeCount => ConductanceVolume::NodeCount,
                },
                ..CentralityOptions::default()
            };
            let table = compute_with(&g, &which, &opts).at(Stage::Centrality)?;
            let dir = out_dir(out)?;
            table.write_csv(&g, &dir.join("centralities.csv")).at(Stage::Persist)?;
            table.write_timings_json(&dir.join("timings.json")).at(Stage::Persist)
        }
        Command::FeatureNet { graph, delta, average_ties } => {
            let g = load_graph(&graph.graph)?;
            let table = compute_with(&g, &MetricSet::Local, &CentralityOptions::default()).at(Stage::Centrality)?;
            let (net, selection) = select_features(&table, delta).at(Stage::Selection)?;
            let ties = if average_ties { RankTies::Average } else { RankTies::NodeId };
            let features = normalize(&table, &selection.chosen, ties).at(Stage::Normalization)?;
            let dir = out_dir(out)?;
            write_json(&dir.join("selection.json"), &SelectionReport::new(&net, &selection))?;
            features.write_csv(&g, &dir.join("features.csv")).at(Stage::Persist)?;
            let names: Vec<&str> = selection.chosen.iter().map(|m| m.name()).collect();
            println!("chosen: {}", names.join(", "));
            Ok(())
        }
        Command::SirLabel { graph, sir } => {
            let g = load_graph(&graph.graph)?;
            let scores = influence_scores(&g, &sir.config()).at(Stage::Labeling)?;
            let dir = out_dir(out)?;
            scores.write_csv(&g, &dir.join("ic.csv")).at(Stage::Persist)?;
            println!("beta = {}", scores.beta);
            Ok(())
        }
        Command::Dataset { graph, scores, top_fraction, neg_ratio, neg_fraction, split, seed } => {
            let g = load_graph(&graph.graph)?;
            let scores = InfluenceScores::read_csv(&g, &scores).at(Stage::Load)?;
            let negatives = match neg_fraction {
                Some(f) => NegativeSampling::FractionOfRest(f),
                None => NegativeSampling::Ratio(neg_ratio),
            };
            let cfg = DatasetConfig { top_fraction, negatives, split, seed };
            let dataset = build_dataset(&scores, &cfg).at(Stage::Dataset)?;
            let dir = out_dir(out)?;
            dataset.write_json(&dir.join("dataset.json")).at(Stage::Persist)
        }
        Command::Train { graph, features, dataset, model } => {
            let g = load_graph(&graph.graph)?;
            let x = FeatureMatrix::read_csv(&g, &features).at(Stage::Load)?;
            let data = LabeledDataset::read_json(&dataset).at(Stage::Load)?;
            let cfg = model.spec().resolve();
            let p = adjusted_transition(&g);
            let (params, trace) = train(&p, x.values.view(), &data, &cfg).at(Stage::Training)?;
            let preds = predict(&params, &cfg, &p, x.values.view()).at(Stage::Evaluation)?;
            let truth: Vec<u8> = data.test.iter().map(|&u| data.label(u).unwrap_or(0)).collect();
            let classes: Vec<u8> = data.test.iter().map(|&u| preds[u].class).collect();
            let probs: Vec<f64> = data.test.iter().map(|&u| preds[u].probability).collect();
            let report = evaluate(&classes, &probs, &truth).at(Stage::Evaluation)?;
            let dir = out_dir(out)?;
            save_checkpoint(&dir.join("model.json"), &cfg, &params).at(Stage::Persist)?;
            write_json(&dir.join("trace.json"), &trace)?;
            write_json(&dir.join("metrics.json"), &report)?;
            println!("accuracy {:.4}  f1 {:.4}  auc {:.4}", report.accuracy, report.f1, report.auc);
            Ok(())
        }
        Command::Predict { graph, features, model } => {
            let g = load_graph(&graph.graph)?;
            let x = FeatureMatrix::read_csv(&g, &features).at(Stage::Load)?;
            let (cfg, params) = load_checkpoint(&model).at(Stage::Load)?;
            let preds = predict(&params, &cfg, &adjusted_transition(&g), x.values.view()).at(Stage::Evaluation)?;
            let dir = out_dir(out)?;
            let path = dir.join("predictions.csv");
            let write = || -> Result<(), Error> {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["node", "class", "probability"])?;
                for (u, p) in preds.iter().enumerate() {
                    w.write_record([g.name(u), &p.class.to_string(), &p.probability.to_string()])?;
                }
                w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })
            };
            write().at(Stage::Persist)
        }
        Command::Ablate { study } => match study {
            Study::Depth { config, depths } => {
                let cfg = load_config(&config, out, out_given)?;
                let depths = depths.unwrap_or_else(|| cfg.ablation.depths.clone());
                for r in ablate_depth(&cfg, &depths)? {
                    println!("depth {:>3}: accuracy {:.4}", r.model.hidden_layers, r.metrics.accuracy);
                }
                Ok(())
            }
            Study::Features { config, modes } => {
                let cfg = load_config(&config, out, out_given)?;
                let modes = match modes {
                    Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<FeatureMode>, _>>().at(Stage::Config)?,
                    None => cfg.ablation.feature_modes.clone(),
                };
                for (mode, r) in modes.iter().zip(ablate_features(&cfg, &modes)?) {
                    println!("{mode}: accuracy {:.4}  f1 {:.4}  auc {:.4}", r.metrics.accuracy, r.metrics.f1, r.metrics.auc);
                }
                Ok(())
            }
            Study::Loo { config } => {
                let cfg = load_config(&config, out, out_given)?;
                let study = ablate_leave_one_out(&cfg)?;
                for row in &study.summary {
                    println!("{:<20} delta accuracy {:+.4}", row.metric.name(), row.delta_accuracy);
                }
                Ok(())
            }
        },
        Command::BenchTiming { graph, name } => {
            let g = load_graph(&graph.graph)?;
            let name = name.unwrap_or_else(|| {
                graph.graph.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into())
            });
            let row = timing_benchmark(&g, &name, &MetricSet::All, &CentralityOptions::default()).at(Stage::Centrality)?;
            let dir = out_dir(out)?;
            write_timing_csv(std::slice::from_ref(&row), &dir.join("timing.csv")).at(Stage::Persist)?;
            println!("{}: all {:.3}s  global {:.3}s  local {:.3}s", row.network, row.all, row.global, row.local);
            Ok(())
        }
        Command::Pipeline { config } => {
            let cfg = load_config(&config, out, out_given)?;
            let record = run_pipeline(&cfg)?;
            let chosen: Vec<&str> = record.features.iter().map(String::as_str).collect();
            println!("features: {}", chosen.join(", "));
            let m = record.metrics;
            println!("accuracy {:.4}  f1 {:.4}  auc {:.4}", m.accuracy, m.f1, m.auc);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let out_given = std::env::args().any(|a| a == "--out-dir" || a.starts_with("--out-dir="));
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli, out_given) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e {
                Error::Stage { stage, source } => eprintln!("error [{stage}]: {source}"),
                other => eprintln!("error: {other}"),
            }
            ExitCode::FAILURE
        }
    }
}
