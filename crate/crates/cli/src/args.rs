//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "semlabel",
    version,
    about = "Assign semantic labels (class, property) to columns of tabular data sources",
    after_help = "Exit codes: 0 success, 2 usage or input error, 3 contract mismatch \
                  (feature schema, model version), 4 internal error.\n\
                  Errors are written to stderr as one JSON object per line."
)]
pub struct Cli {
    /// Worker threads for fold, tree and bag parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a labeled corpus and write the model file.
    Train(TrainArgs),
    /// Rank labels for every column of a CSV file.
    Predict(PredictArgs),
    /// Run leave-one-out or repeated-holdout evaluation and write a report.
    Benchmark(BenchmarkArgs),
    /// Repeated holdout over a grid of bagging parameters; CSV output.
    Sweep(SweepArgs),
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Print the feature names of a feature set in vector order.
    Schema(SchemaArgs),
    /// Summarize a model file.
    Inspect(InspectArgs),
}

/// Pipeline settings shared by train, benchmark and sweep. Unset flags fall
/// back to the `--config` file, then to built-in defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct PipelineArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Corpus directory with sources/*.csv and labels.json.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Label file (default: <corpus>/labels.json).
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Classifier: rf or mlp.
    #[arg(long, value_name = "KIND")]
    pub model: Option<String>,
    /// Feature set: base, base_plus or all.
    #[arg(long, value_name = "SET")]
    pub features: Option<String>,
    /// Bags per attribute; enables bagging together with --bag-size.
    #[arg(long, value_name = "N")]
    pub num_bags: Option<usize>,
    /// Rows sampled per bag.
    #[arg(long, value_name = "N")]
    pub bag_size: Option<usize>,
    /// Bag test attributes too and average the bag predictions.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub predict_bagging: Option<bool>,
    /// Class rebalancing: none, mean or max.
    #[arg(long, value_name = "STRATEGY")]
    pub rebalance: Option<String>,
    /// Rebalance bag instances (instance) or whole attributes (attribute).
    #[arg(long, value_name = "LEVEL")]
    pub rebalance_level: Option<String>,
    /// Keep unknown-labeled attributes in training and scoring.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub include_unknown: Option<bool>,
    /// Trees in the random forest.
    #[arg(long, value_name = "N")]
    pub trees: Option<usize>,
    /// Training epochs of the MLP.
    #[arg(long, value_name = "N")]
    pub epochs: Option<usize>,
    /// Neighbours averaged by the name alignment feature.
    #[arg(long, value_name = "K")]
    pub name_k: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Label attributes missing from the label file as unknown.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub lenient: Option<bool>,
    /// CSV delimiter (single byte).
    #[arg(long, value_name = "CHAR")]
    pub delimiter: Option<char>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Model file to write.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// CSV file whose columns are labeled.
    #[arg(value_name = "CSV")]
    pub input: PathBuf,
    /// Model file produced by `train`.
    #[arg(short = 'm', long = "model-file", value_name = "FILE")]
    pub model_file: PathBuf,
    /// Expected feature set; must match the model.
    #[arg(long, value_name = "SET")]
    pub features: Option<String>,
    /// Average predictions over bags of each column.
    #[arg(long)]
    pub predict_bags: bool,
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub num_bags: usize,
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub bag_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the N best labels per column.
    #[arg(long, value_name = "N")]
    pub top: Option<usize>,
    /// Human-readable output instead of JSON lines.
    #[arg(long)]
    pub pretty: bool,
    /// The CSV has no header row; columns are named col_1..col_n.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, value_name = "CHAR", default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct HoldoutArgs {
    /// Fraction of sources used for training (holdout only).
    #[arg(long, value_name = "P")]
    pub p: Option<f64>,
    /// Holdout iterations (holdout only).
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// loo (leave one source out) or holdout.
    #[arg(long, value_name = "PROTOCOL")]
    pub protocol: Option<String>,
    #[command(flatten)]
    pub holdout: HoldoutArgs,
    /// Report file to write.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Report format: json or markdown (default: from the file extension).
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Also write a markdown table to this file.
    #[arg(long, value_name = "FILE")]
    pub markdown: Option<PathBuf>,
    /// Embed wall-clock timings in the JSON report.
    #[arg(long)]
    pub with_timing: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub holdout: HoldoutArgs,
    /// Comma-separated num_bags values.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    pub num_bags_grid: Vec<usize>,
    /// Comma-separated bag_size values.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    pub bag_size_grid: Vec<usize>,
    /// CSV file to write (default: stdout).
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON synthesis spec; overrides the inline flags.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub sources: usize,
    /// Number of labels taken from the built-in generator catalogue.
    #[arg(long, default_value_t = 8)]
    pub labels: usize,
    #[arg(long, default_value_t = 0.1)]
    pub unknown_frac: f64,
    #[arg(long, default_value_t = 200)]
    pub min_rows: usize,
    #[arg(long, default_value_t = 500)]
    pub max_rows: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output corpus directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    /// Feature set: base, base_plus or all.
    #[arg(long, value_name = "SET")]
    pub features: Option<String>,
    /// Take the label order from this model file.
    #[arg(short = 'm', long = "model-file", value_name = "FILE", conflicts_with_all = ["corpus", "label"])]
    pub model_file: Option<PathBuf>,
    /// Take the labels from this corpus directory.
    #[arg(long, value_name = "DIR", conflicts_with = "label")]
    pub corpus: Option<PathBuf>,
    /// Label id such as Person.name or unknown; repeatable.
    #[arg(long, value_name = "ID")]
    pub label: Vec<String>,
    /// Include the unknown label when labels come from a corpus.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true", default_value = "true")]
    pub include_unknown: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(value_name = "MODEL")]
    pub model_file: PathBuf,
    /// Print the full model as JSON.
    #[arg(long)]
    pub dump_json: bool,
}
