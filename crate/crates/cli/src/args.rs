use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "syge",
    version,
    about = "Train and evaluate geometric embeddings of dependency graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options every subcommand accepts.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Single-threaded, bitwise-reproducible execution.
    #[arg(long)]
    pub deterministic: bool,
    /// Worker threads (training: 1 selects the deterministic trainer).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for reports, checkpoints and manifests.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a triple dataset cache from CoNLL-U or knowledge-graph files.
    Ingest(IngestArgs),
    /// Train one model on a dataset cache.
    Train(TrainArgs),
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Paired bootstrap between two prediction files, Holm-corrected.
    Compare(CompareArgs),
    /// Export 2-d PCA coordinates of raw and contextualised word vectors.
    ExportPca(ExportPcaArgs),
    /// Count the learnable parameters of a model.
    Params(ParamsArgs),
    /// Render phrase-similarity reports as a markdown table.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Conllu,
    Kgtsv,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    /// conllu (default) | kgtsv
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Minimum token count for a word to enter the vocabulary (default 0).
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Drop `punct` arcs before emitting triples (default true).
    #[arg(long, action = clap::ArgAction::Set)]
    pub drop_punct: Option<bool>,
    /// Output file name inside `--out`.
    #[arg(long, default_value = "dataset.syd")]
    pub name: String,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset cache written by `ingest`.
    #[arg(long)]
    pub data: PathBuf,
    /// dm | mure | rote | refe | atte
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub neg: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// sgd | adam
    #[arg(long)]
    pub opt: Option<String>,
    /// sgns | bernoulli | softmax-ce
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub neg_power: Option<f64>,
    /// Softmax over every entity instead of sampled negatives.
    #[arg(long)]
    pub full_ce: bool,
    /// Start DM relation maps at the identity.
    #[arg(long)]
    pub identity_rel_maps: bool,
    /// Checkpoint file name; defaults to `<model>-seed<seed>.ckpt`.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Word similarity: cosine of word vectors against ratings.
    Wordsim(WordsimArgs),
    /// Phrase similarity under one or more composition strategies.
    Compose(ComposeArgs),
    /// Filtered tail-prediction MRR and Hits@k.
    Kg(KgArgs),
}

#[derive(Debug, Args)]
pub struct WordsimArgs {
    #[command(flatten)]
    pub common: Common,
    /// One checkpoint per seed (repeatable).
    #[arg(long = "ckpt", required = true)]
    pub ckpts: Vec<PathBuf>,
    /// `word1<TAB>word2<TAB>rating` file.
    #[arg(long)]
    pub bench: PathBuf,
    /// Benchmark name in reports; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchFormat {
    Tsv,
    Ml10,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "ckpt", required = true)]
    pub ckpts: Vec<PathBuf>,
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: BenchFormat,
    /// Keep every ML10 participant rating as its own item.
    #[arg(long)]
    pub per_participant: bool,
    /// add | syn-rh | syn-rt | syn-bid | all (repeatable or comma-separated).
    #[arg(long = "strategy", required = true, value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Relation label for a phrase type, e.g. `NN=compound` (repeatable).
    #[arg(long = "map")]
    pub mappings: Vec<String>,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct KgArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub ckpt: PathBuf,
    /// `head<TAB>relation<TAB>tail` triples to rank.
    #[arg(long)]
    pub triples: PathBuf,
    /// Known-true triples removed from the candidate ranking (repeatable).
    #[arg(long = "filter")]
    pub filters: Vec<PathBuf>,
    /// Split label recorded in the report.
    #[arg(long, default_value = "dev")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Prediction CSV of system A (`benchmark,model,strategy,seed,item,gold,pred`).
    pub a: PathBuf,
    /// Prediction CSV of system B.
    pub b: PathBuf,
    /// Only use rows of this strategy from A. Without both filters, rows are
    /// paired by benchmark and strategy.
    #[arg(long)]
    pub strategy_a: Option<String>,
    /// Only use rows of this strategy from B.
    #[arg(long)]
    pub strategy_b: Option<String>,
    #[arg(long, default_value_t = syge::eval::DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    /// Output stem inside `--out`.
    #[arg(long, default_value = "compare")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ExportPcaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub ckpt: PathBuf,
    /// Phrase benchmark whose roots are exported.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: BenchFormat,
    /// One word per line, instead of `--bench`.
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// AN | NN | VO: which roots, and which relation contextualises them.
    #[arg(long, default_value = "VO")]
    pub phrase_type: String,
    /// Relation label overriding the phrase type's default mapping.
    #[arg(long)]
    pub relation: Option<String>,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub vocab: usize,
    #[arg(long)]
    pub rels: usize,
    #[arg(long, default_value_t = syge::trainer::DEFAULT_DIM)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// `reports.json` files written by `eval compose`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
}
