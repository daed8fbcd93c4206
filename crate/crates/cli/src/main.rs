mod commands;
mod task;
mod util;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use task::TaskArgs;

const FORMATS: &str = "\
File formats:
  parallel corpus   source<TAB>reference per line, UTF-8
  translations      one MT sentence per line, aligned with the corpus
  bpe model         header `#bpe v1 <n>`, then `left right` per merge
  vocab             one subword per line; id = line index + 2 (0 = <pad>, 1 = <unk>)
  lexicon           token<TAB>weight
  gazetteer         phrase<TAB>PER|LOC|ORG
  substitutions     from<TAB>to
  dataset           JSON lines: header object, then {src, mt, ref, label, src_ids, mt_ids}
  language model    `#acceptkit-lm v1 ...` text with unigram and trigram counts
  lexical table     `#acceptkit-lex v1`, then source<TAB>target<TAB>prob
  features          TSV, header f1..f17<TAB>label
  svm model         `#acceptkit-svm v1` text: kernel, C, bias, scaler, support vectors
  birnn model       binary `ACKBIRNN`, config JSON, named f64 tensors, SHA-256 trailer
  training log      JSON lines {epoch, train_loss, dev_accuracy, best}
  predictions       label<TAB>score per line
  reports           JSON

Every output file gets a `<file>.meta.json` sidecar with the seed and a
digest of the invocation's configuration.

Exit status: 0 success, 1 usage error, 2 data error.
Log level: -v / -vv, or RUST_LOG.";

#[derive(Debug, Parser)]
#[command(name = "acceptkit", version, about = "Acceptability labels and detectors for machine translation", after_long_help = FORMATS)]
pub struct Cli {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-sentence stages
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Increase log verbosity
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Learn a BPE model from a parallel corpus
    BpeLearn(BpeLearnArgs),
    /// Segment a tokenized text file with a BPE model
    BpeApply(BpeApplyArgs),
    /// Build a subword vocabulary from segmented text
    Vocab(VocabArgs),
    /// Produce translations with an MT adapter
    Translate(TranslateArgs),
    /// Label translations as acceptable or not for a downstream task
    Annotate(AnnotateArgs),
    /// Split a dataset into train, dev and test
    Split(SplitArgs),
    /// Train a trigram language model
    LmTrain(LmTrainArgs),
    /// Train IBM Model 1 lexical probabilities
    Ibm1Train(Ibm1TrainArgs),
    /// Extract the 17 QuEst features for a dataset
    Features(FeaturesArgs),
    /// Train the BiQuEst SVM detector on a feature file
    TrainBiquest(TrainBiquestArgs),
    /// Train the BiRNN detector on a dataset
    TrainBirnn(TrainBirnnArgs),
    /// Predict acceptability with a trained detector
    Predict(PredictArgs),
    /// Score predictions against gold labels
    Eval(EvalArgs),
    /// Annotate, split, train and evaluate in one seeded run
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Side {
    Source,
    Target,
    Joint,
}

#[derive(Debug, Args, Serialize)]
pub struct BpeLearnArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, value_enum, default_value_t = Side::Joint)]
    pub side: Side,
    #[arg(long, default_value_t = 10_000)]
    pub merges: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BpeApplyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Text file, one sentence per line
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VocabArgs {
    /// Segmented text, one sentence per line
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 30_000)]
    pub size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum AdapterKind {
    File,
    Command,
    Noise,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MtArgs {
    #[arg(long, value_enum, default_value_t = AdapterKind::Noise)]
    pub adapter: AdapterKind,
    /// Translations file for the file adapter
    #[arg(long)]
    pub mt_file: Option<PathBuf>,
    /// Shell command for the command adapter
    #[arg(long)]
    pub mt_command: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub drop: f64,
    #[arg(long, default_value_t = 0.0)]
    pub swap: f64,
    #[arg(long, default_value_t = 0.0)]
    pub substitute: f64,
    /// Substitution lexicon for the noise adapter
    #[arg(long)]
    pub substitutions: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslateArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub mt: MtArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EncodingArgs {
    /// BPE merges for the subword encoder
    #[arg(long, default_value_t = 10_000)]
    pub merges: usize,
    #[arg(long, default_value_t = 30_000)]
    pub vocab_size: usize,
    /// Learn separate source and target BPE models
    #[arg(long)]
    pub separate_bpe: bool,
    /// Drop pairs whose source exceeds this many subwords
    #[arg(long, default_value_t = 50)]
    pub max_source_subwords: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Translations file aligned with --pairs
    #[arg(long)]
    pub mt: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    /// Directory receiving the BPE models and vocabularies
    #[arg(long)]
    pub encoder_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub dev: usize,
    #[arg(long)]
    pub test: usize,
    /// Downsample the majority class of the training split
    #[arg(long)]
    pub downsample: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum LmSide {
    Source,
    Target,
}

#[derive(Debug, Args, Serialize)]
pub struct LmTrainArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, value_enum)]
    pub side: LmSide,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Ibm1TrainArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    /// Parallel corpus the language models, quartiles and lexical table are trained on
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub ibm1_iterations: usize,
    /// Use a trained source LM instead of training one
    #[arg(long)]
    pub source_lm: Option<PathBuf>,
    #[arg(long)]
    pub target_lm: Option<PathBuf>,
    /// Use a trained lexical table instead of training one
    #[arg(long)]
    pub lex: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum KernelKind {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SvmArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Rbf)]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// RBF width; defaults to 1 / number of features
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Train on a seeded random subset of at most this many rows
    #[arg(long)]
    pub max_train: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainBiquestArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BirnnArgs {
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    #[arg(long, default_value_t = 256)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 256)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 512)]
    pub proj_dim: usize,
    #[arg(long, default_value_t = 1024)]
    pub penult_dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    #[arg(long, default_value_t = 100)]
    pub max_epochs: usize,
    /// Train in f64 instead of f32
    #[arg(long)]
    pub f64: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainBirnnArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[command(flatten)]
    pub birnn: BirnnArgs,
    /// Training log (JSON lines)
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// BiRNN (.bin) or BiQuEst (.svm) model; the type is detected from the file
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset (BiRNN) or feature file (BiQuEst)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset or feature file carrying gold labels
    #[arg(long)]
    pub gold: PathBuf,
    /// Report path; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum DetectorKind {
    Birnn,
    Biquest,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub mt: MtArgs,
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[arg(long, value_enum, default_value_t = DetectorKind::Both)]
    pub detector: DetectorKind,
    #[arg(long)]
    pub dev: usize,
    #[arg(long)]
    pub test: usize,
    #[command(flatten)]
    pub birnn: BirnnArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[arg(long, default_value_t = 5)]
    pub ibm1_iterations: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(util::exit_code(&e))
        }
    }
}
