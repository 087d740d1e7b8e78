//! `ltrepair`: composable subcommands over a bundle directory.
//!
//! Every subcommand reads its inputs from the bundle (`--bundle`) and the
//! artifact directory (`--out`, defaulting to the bundle) and writes only its
//! own artifacts. Failures print a single `error[<kind>]: <message>` line on
//! standard error and exit non-zero.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltrepair::classifier::Variant;
use ltrepair::lt::UpdateMode;

#[derive(Parser, Debug)]
#[command(name = "ltrepair", version, about = "Train graph classifiers on noisy labels and repair their predictions")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random stage of the command
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Bundle directory (meta.json, edges.txt, features.bin, labels.txt)
    #[arg(long, global = true)]
    pub bundle: Option<PathBuf>,

    /// Artifact directory; defaults to the bundle directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print JSON instead of text tables
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker thread cap for grid runs
    #[arg(long, global = true, env = "LT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a stochastic block model bundle
    Synth(SynthArgs),
    /// Convert a LINQS citation dataset (.content/.cites) into a bundle
    Import(ImportArgs),
    /// Write a 40/30/30 train/val/test split
    Split,
    /// Corrupt a fraction of labels
    Noise(NoiseArgs),
    /// Train a classifier on the train nodes
    Train(TrainArgs),
    /// Add random edges from perturbator nodes
    Perturb(PerturbArgs),
    /// Run label-transition inference on the test nodes
    Infer(InferArgs),
    /// Score the artifacts and write report.jsonl
    Eval(EvalArgs),
    /// Run split, noise, train, perturb, infer and eval over a seed and noise grid
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    pub blocks: usize,
    #[arg(long, default_value_t = 1000)]
    pub nodes_per_block: usize,
    #[arg(long, default_value_t = 0.013)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.0045)]
    pub p_out: f64,
    #[arg(long, default_value_t = 1.0)]
    pub feature_noise: f64,
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    #[arg(long)]
    pub content: PathBuf,
    #[arg(long)]
    pub cites: PathBuf,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    /// Fraction of nodes whose label is replaced
    #[arg(long, default_value_t = 0.1)]
    pub nr: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Gcn,
    Sgc,
}

impl From<ModelArg> for Variant {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gcn => Variant::Gcn,
            ModelArg::Sgc => Variant::Sgc,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "gcn")]
    pub model: ModelArg,
    #[arg(long = "train-epochs", default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub hidden: usize,
    /// Propagation depth for SGC
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
}

#[derive(Args, Debug, Clone)]
pub struct PerturbArgs {
    /// Fraction of validation/test nodes that become perturbators
    #[arg(long, default_value_t = 0.01)]
    pub fraction: f64,
    /// New edges per perturbator
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum UpdateArg {
    Incremental,
    PerEpoch,
}

impl From<UpdateArg> for UpdateMode {
    fn from(u: UpdateArg) -> Self {
        match u {
            UpdateArg::Incremental => UpdateMode::Incremental,
            UpdateArg::PerEpoch => UpdateMode::PerEpoch,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InferArgs {
    /// Warm-up sweeps that use the train-graph transition matrix
    #[arg(long, default_value_t = 20)]
    pub ws: usize,
    /// Total Gibbs sweeps
    #[arg(long, default_value_t = 100)]
    pub epochs_infer: usize,
    /// Symmetric Dirichlet prior
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "incremental")]
    pub update_mode: UpdateArg,
    /// Keep the warm-up transition matrix for every sweep
    #[arg(long)]
    pub fixed_phi: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Dataset name in the report; defaults to the bundle directory name
    #[arg(long)]
    pub dataset: Option<String>,
    /// Record inference wall-clock time in the report
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Dataset name; the bundle defaults to $LT_DATA_DIR/<dataset>
    #[arg(long)]
    pub dataset: Option<String>,
    /// Comma-separated noise ratios
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub nr: Vec<f64>,
    /// Comma-separated seeds; defaults to --seed
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Simulate perturbators before inference
    #[arg(long)]
    pub perturb: bool,
    /// Also run inference with a fixed transition matrix
    #[arg(long)]
    pub ablation: bool,
    /// Record inference wall-clock time in the report
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub perturbation: PerturbArgs,
    #[command(flatten)]
    pub infer: InferArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Synth(a) => commands::synth(g, a),
        Command::Import(a) => commands::import(g, a),
        Command::Split => commands::split(g),
        Command::Noise(a) => commands::noise(g, a),
        Command::Train(a) => commands::train(g, a),
        Command::Perturb(a) => commands::perturb(g, a),
        Command::Infer(a) => commands::infer(g, a),
        Command::Eval(a) => commands::eval(g, a),
        Command::Pipeline(a) => commands::pipeline(g, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
