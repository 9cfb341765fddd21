//! coopwatch: dataset preparation, detection evaluation, replay
//! prediction, and the monitoring service, from one binary.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "coopwatch", version, about = "Poultry health detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dataset validation, splitting, and augmentation
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Detection evaluation against ground truth
    #[command(subcommand)]
    Eval(EvalCommand),
    /// One-shot replay prediction
    Predict(PredictArgs),
    /// Run the monitoring HTTP service
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Check images/labels pairing, label syntax, and class counts
    Validate(ValidateArgs),
    /// Produce a deterministic train/test/val split manifest
    Split(SplitArgs),
    /// Apply an augmentation spec to every labeled image
    Augment(AugmentArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Dataset root containing images/ and labels/
    root: PathBuf,
    /// Class list file (defaults to `<root>/classes.txt`)
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Treat missing counterparts as failures, not warnings
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SplitArgs {
    /// Dataset root containing images/
    root: PathBuf,
    /// Comma-separated train,test,val fractions
    #[arg(long, default_value = "0.7,0.2,0.1")]
    ratios: String,
    /// Shuffle seed
    #[arg(long)]
    seed: u64,
    /// Output manifest path (defaults to `<root>/split.json`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentArgs {
    /// Dataset root containing images/ and labels/
    root: PathBuf,
    /// Augmentation spec (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Output dataset root
    #[arg(long)]
    out: PathBuf,
    /// Class list file (defaults to `<root>/classes.txt`)
    #[arg(long)]
    classes: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Evaluate a detections file against a labeled dataset
    Run(EvalRunArgs),
}

#[derive(Args)]
struct EvalRunArgs {
    /// Ground-truth dataset root (images/, labels/, classes.txt)
    #[arg(long)]
    gt: PathBuf,
    /// Detections file (JSON Lines)
    #[arg(long)]
    dets: PathBuf,
    /// Report output directory
    #[arg(long)]
    out: PathBuf,
    /// Class list file (defaults to `<gt>/classes.txt`)
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Reporting confidence threshold for the per-class table
    #[arg(long, default_value_t = 0.25)]
    conf: f64,
    /// Confusion matrix confidence threshold
    #[arg(long, default_value_t = 0.25)]
    confusion_conf: f64,
    /// Confusion matrix IoU threshold
    #[arg(long, default_value_t = 0.45)]
    confusion_iou: f64,
}

#[derive(Args)]
struct PredictArgs {
    /// Replay fixture (JSON Lines)
    #[arg(long)]
    fixture: PathBuf,
    /// Image id to look up
    #[arg(long)]
    image_id: String,
    /// Class list file (defaults to the built-in poultry classes)
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Post-processing confidence threshold
    #[arg(long, default_value_t = 0.25)]
    conf_threshold: f64,
    /// Post-processing NMS IoU threshold
    #[arg(long, default_value_t = 0.45)]
    nms_iou: f64,
    /// Post-processing detection cap
    #[arg(long, default_value_t = 300)]
    max_detections: usize,
    /// Confidence floor for the disease verdict
    #[arg(long, default_value_t = 0.497)]
    alert_floor: f64,
}

#[derive(Args)]
struct ServeArgs {
    /// Service config file (JSON); the COOP_CONFIG env var overrides this
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Dataset(DatasetCommand::Validate(args)) => commands::dataset_validate(args),
        Command::Dataset(DatasetCommand::Split(args)) => commands::dataset_split(args),
        Command::Dataset(DatasetCommand::Augment(args)) => commands::dataset_augment(args),
        Command::Eval(EvalCommand::Run(args)) => commands::eval_run(args),
        Command::Predict(args) => commands::predict(args),
        Command::Serve(args) => commands::serve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
