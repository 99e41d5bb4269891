mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::PipelineFlags;

#[derive(Parser)]
#[command(
    name = "relief",
    version,
    about = "Region proposals from convolutional feature maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the effective configuration to this file.
    #[arg(long, global = true)]
    dump_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate proposals for one or more RFM1 feature stacks.
    Generate(GenerateArgs),
    /// Recall-to-IoU curve of a proposal file against annotations.
    Eval(EvalArgs),
    /// Time proposal generation over a set of stacks.
    Bench(BenchArgs),
    /// Write a synthetic corpus with planted objects.
    Synth(SynthArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    /// RFM1 feature stack(s).
    #[arg(long, num_args = 1..)]
    features: Vec<PathBuf>,
    /// Output proposals (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    proposals: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// IoU thresholds as lo:hi:step.
    #[arg(long)]
    iou_grid: Option<String>,
    /// Only the first K proposals of each image count.
    #[arg(long)]
    top_k: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// A directory of .rfm files, or individual files.
    #[arg(long, num_args = 1..)]
    features: Vec<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of images.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 224)]
    image_w: u32,
    #[arg(long, default_value_t = 224)]
    image_h: u32,
    /// Pixels per feature cell.
    #[arg(long, default_value_t = 8.0)]
    stride: f64,
    /// Objects per image.
    #[arg(long, default_value_t = 3)]
    objects: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 8)]
    channels: usize,
    /// Smallest blob side in cells.
    #[arg(long, default_value_t = 2)]
    min_blob: usize,
    /// Largest blob side in cells.
    #[arg(long, default_value_t = 5)]
    max_blob: usize,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RELIEF_LOG", "warn"))
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
