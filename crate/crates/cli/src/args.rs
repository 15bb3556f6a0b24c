//! Command-line and echoed-config schema. Every subcommand's arguments
//! serialize to TOML so a run can be replayed from its `config.toml`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invkge::{ModelKind, NormOrder, Task, TrainConfig, Weighting};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "invkge", version, about = "Embed out-of-graph entities with inverted TransE/RotatE")]
pub struct Cli {
    /// Seed for every random stream (init, negatives, shuffling, capping).
    #[arg(long, global = true, env = "INVKGE_SEED")]
    pub seed: Option<u64>,

    /// Worker threads for evaluation; 1 keeps every run serial.
    #[arg(long, global = true, env = "INVKGE_THREADS", default_value_t = 1)]
    pub threads: usize,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Train TransE/RotatE on the training split.
    Pretrain(PretrainArgs),
    /// Dump reduced embeddings for every OOKG entity.
    Estimate(EstimateArgs),
    /// Link prediction or triplet classification on the test split.
    Eval(EvalArgs),
    /// Neighbor-cap, uniform-weight and OOKG-ratio ablations.
    Ablate(AblateArgs),
    /// Check the split invariants; exits 1 on violations.
    Validate(ValidateArgs),
    /// Write a synthetic benchmark.
    Synth(SynthArgs),
    /// Re-run a command from an echoed config.toml.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Lp,
    Tc,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Lp => Task::LinkPrediction,
            TaskArg::Tc => Task::Classification,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// Directory with train.txt, aux.txt, valid.txt and test.txt.
    #[arg(long, env = "INVKGE_DATA")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub aux: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// lp: unlabeled files; tc: valid/test carry a label column.
    #[arg(long, value_enum, default_value = "lp")]
    pub task: TaskArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Transe,
    Rotate,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> ModelKind {
        match m {
            ModelArg::Transe => ModelKind::TransE,
            ModelArg::Rotate => ModelKind::RotatE,
        }
    }
}

impl From<ModelKind> for ModelArg {
    fn from(m: ModelKind) -> ModelArg {
        match m {
            ModelKind::TransE => ModelArg::Transe,
            ModelKind::RotatE => ModelArg::Rotate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fb15k,
    Wn11,
}

/// Hyperparameter flags; each overrides the preset and config file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TrainFlags {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Norm order of the distance: 1 or 2.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub norm: Option<u8>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Negatives per positive.
    #[arg(long = "neg")]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long = "batch")]
    pub batch_size: Option<usize>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long)]
    pub filter_negatives: Option<bool>,
}

impl TrainFlags {
    pub fn apply(&self, c: &mut TrainConfig) -> anyhow::Result<()> {
        if let Some(m) = self.model {
            c.model = m.into();
        }
        if let Some(n) = self.norm {
            c.norm = NormOrder::from_order(n)?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(dim, gamma, alpha, negatives, l2, batch_size, learning_rate, steps, log_every, filter_negatives);
        Ok(())
    }

    /// Flags that pin every field of `c`.
    pub fn pinning(c: &TrainConfig) -> Self {
        TrainFlags {
            model: Some(c.model.into()),
            norm: Some(c.norm.order()),
            dim: Some(c.dim),
            gamma: Some(c.gamma),
            alpha: Some(c.alpha),
            negatives: Some(c.negatives),
            l2: Some(c.l2),
            batch_size: Some(c.batch_size),
            learning_rate: Some(c.learning_rate),
            steps: Some(c.steps),
            log_every: Some(c.log_every),
            filter_negatives: Some(c.filter_negatives),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PretrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Starting point for the hyperparameters.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// TOML file with TrainConfig fields, applied after the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Correlation,
    Degree,
    Uniform,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WeightArgs {
    /// Candidate weighting; defaults to correlation for lp, degree for tc.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Smoothing added to degrees before the logarithm.
    #[arg(long, default_value_t = Weighting::DEFAULT_DELTA)]
    pub delta: f64,
    /// Use at most this many aux neighbors per OOKG entity.
    #[arg(long)]
    pub cap: Option<usize>,
}

impl WeightArgs {
    pub fn weighting(&self, task: Task) -> Weighting {
        match self.scheme {
            None => match Weighting::default_for(task) {
                Weighting::Degree { .. } => Weighting::Degree { delta: self.delta },
                w => w,
            },
            Some(SchemeArg::Correlation) => Weighting::Correlation,
            Some(SchemeArg::Degree) => Weighting::Degree { delta: self.delta },
            Some(SchemeArg::Uniform) => Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelInput {
    /// Checkpoint written by `pretrain`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Vocabulary sidecar; defaults to vocab.tsv next to the checkpoint.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelInput,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelInput,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Also write the relation correlation matrix.
    #[arg(long)]
    pub dump_correlation: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Required unless the only variant is `ratio`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Comma-separated: full, uniform, cap<k>, ratio.
    #[arg(long, value_delimiter = ',', required = true)]
    pub variants: Vec<String>,
    /// Dataset directories for the ratio sweep.
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<PathBuf>,
    /// Checkpoints for the ratio sweep, one per dataset; defaults to
    /// `<dataset>/checkpoint.bin`.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub entities: usize,
    #[arg(long, default_value_t = 10)]
    pub relations: usize,
    /// Training triplets.
    #[arg(long, default_value_t = 5000)]
    pub triplets: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ookg_fraction: f64,
    #[arg(long, value_enum, default_value = "lp")]
    pub task: TaskArg,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A config.toml written by an earlier run.
    pub config: PathBuf,
}

/// What every command writes to `<out>/config.toml`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Echo {
    pub seed: u64,
    pub threads: usize,
    #[serde(flatten)]
    pub command: Command,
}
