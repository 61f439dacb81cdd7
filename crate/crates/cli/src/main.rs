//! `twister`: command-line front end for the tornado early-detection
//! toolkit. Subcommands wire the library into the daily workflow: generate
//! or assemble datasets, train classifiers, evaluate and ablate them, and
//! run the rolling daily monitor.
//!
//! Exit codes: 0 success, 1 data or model error, 2 usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod monitor;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<twister_core::Error> for CliError {
    fn from(e: twister_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "twister",
    version,
    about = "Tornado early-detection toolkit: synthesize or ingest gridded daily weather, \
             train and compare classifiers, verify with POD/FAR, and monitor for alerts",
    after_help = "Every flag can also come from --config (one `key = value` per line, `#` \
                  comments); flags override the config file, which overrides built-in defaults."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset (dataset, catalog and snapshot files)
    Synth(SynthArgs),
    /// Assemble a labeled dataset from an event catalog and a snapshot directory
    BuildDataset(BuildDatasetArgs),
    /// Featurize a dataset and train one classifier
    Train(TrainArgs),
    /// Evaluate a trained model on a test split
    Evaluate(EvaluateArgs),
    /// Train and evaluate classifiers across 1..5-day windows
    Ablate(AblateArgs),
    /// Stream daily snapshots through a model and emit alert records
    Monitor(MonitorArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of tornado events
    #[arg(long)]
    tornado: Option<usize>,
    /// Number of null events
    #[arg(long)]
    null: Option<usize>,
    /// Class-mean offset in noise-sigma units (>= 0)
    #[arg(long, allow_hyphen_values = true)]
    separation: Option<f64>,
    /// Days of history per window (1..=5)
    #[arg(long)]
    window_days: Option<usize>,
    /// First event anchor date (YYYY-MM-DD)
    #[arg(long)]
    start_date: Option<chrono::NaiveDate>,
    /// Number of 5-degree regions to spread events over (1..=60)
    #[arg(long)]
    regions: Option<usize>,
    /// Output directory (dataset.json, catalog.csv, snapshots/)
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BuildDatasetArgs {
    /// Event catalog CSV
    #[arg(long)]
    catalog: PathBuf,
    /// Directory of {region_id}_{date}.json snapshot files
    #[arg(long)]
    snapshots: PathBuf,
    /// Days of history per window (1..=5)
    #[arg(long)]
    window_days: Option<usize>,
    /// Minimum days between a null event and any same-region tornado
    #[arg(long)]
    min_gap_days: Option<u32>,
    /// Output dataset file
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset file
    #[arg(long)]
    dataset: PathBuf,
    /// Classifier kind: gaussian_nb, decision_tree, random_forest,
    /// linear_svm, knn, adaboost
    #[arg(long)]
    kind: Option<String>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Train only on windows strictly before this year
    #[arg(long)]
    test_year: Option<i32>,
    /// Truncate windows to this many most-recent days before featurizing
    #[arg(long)]
    window_days: Option<usize>,
    /// Random forest: tree count
    #[arg(long)]
    trees: Option<usize>,
    /// Trees: maximum depth (unlimited if omitted)
    #[arg(long)]
    max_depth: Option<u32>,
    /// Trees: minimum samples to split a node
    #[arg(long)]
    min_samples_split: Option<usize>,
    /// Random forest: candidate features per split (default ceil(sqrt(d)))
    #[arg(long)]
    max_features: Option<usize>,
    /// Random forest: disable bootstrap resampling
    #[arg(long)]
    no_bootstrap: bool,
    /// k-NN: neighbor count
    #[arg(long)]
    k: Option<usize>,
    /// AdaBoost: boosting rounds
    #[arg(long)]
    rounds: Option<usize>,
    /// Linear SVM: L2 regularization strength
    #[arg(long)]
    lambda: Option<f64>,
    /// Linear SVM: epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Also export the training feature matrix as CSV
    #[arg(long)]
    features_csv: Option<PathBuf>,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Dataset to split by --test-year
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Year whose windows form the test set
    #[arg(long)]
    test_year: Option<i32>,
    /// Explicit test dataset (alternative to --dataset/--test-year)
    #[arg(long)]
    test_dataset: Option<PathBuf>,
    /// Decision threshold on the tornado probability
    #[arg(long)]
    threshold: Option<f64>,
    /// Write the JSON report here
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the plain-text table here
    #[arg(long)]
    out_table: Option<PathBuf>,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Dataset to split by --test-year
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Year whose windows form the test set
    #[arg(long)]
    test_year: Option<i32>,
    /// Explicit train dataset (alternative to --dataset/--test-year)
    #[arg(long)]
    train_dataset: Option<PathBuf>,
    /// Explicit test dataset
    #[arg(long)]
    test_dataset: Option<PathBuf>,
    /// RNG seed shared by the default specs
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated classifier kinds (default: all six)
    #[arg(long)]
    kinds: Option<String>,
    /// Comma-separated window sizes (default: 1,2,3,4,5)
    #[arg(long)]
    windows: Option<String>,
    /// Decision threshold on the tornado probability
    #[arg(long)]
    threshold: Option<f64>,
    /// Write the JSON report here
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the plain-text table here (also printed to stdout)
    #[arg(long)]
    out_table: Option<PathBuf>,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MonitorArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Days per window (default: derived from the model)
    #[arg(long)]
    window_days: Option<usize>,
    /// Alert threshold on the tornado probability
    #[arg(long)]
    threshold: Option<f64>,
    /// Snapshot files in arrival order; reads paths from stdin when empty
    paths: Vec<PathBuf>,
    /// Key-value config file (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::BuildDataset(args) => commands::build_dataset(args),
        Command::Train(args) => commands::train(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Ablate(args) => commands::ablate(args),
        Command::Monitor(args) => commands::monitor(args),
    };
    let code = match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}
