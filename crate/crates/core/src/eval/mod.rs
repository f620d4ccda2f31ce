//! Benchmarks, correlation statistics, significance testing, link prediction
//! and PCA export.

mod bench_data;
mod mrr;
mod pca;
mod report;
mod signif;
mod similarity;
mod stats;

pub use bench_data::{
    read_composition, read_ml10, read_wordsim, surface_to_phrase, PhrasePairItem, PhraseWords, WordPairItem,
};
pub use mrr::{eval_mrr, tail_rank, MrrReport};
pub use pca::{pca_project, Pca, PCA_MAX_ITERS, PCA_TOL};
pub use report::{composition_table, pca_csv, predictions_csv, reports_csv, summary_json};
pub use signif::{bootstrap_compare, BootstrapResult, DEFAULT_BOOTSTRAP, MIN_BOOTSTRAP};
pub use similarity::{eval_composition, eval_wordsim, EvalReport, Prediction, SeedResult};
pub use stats::{aggregate_seeds, average_ranks, holm_correct, pearson, spearman, SeedAggregate};

use crate::checkpoint::Checkpoint;
use crate::compose::head_transform;
use crate::error::Result;

/// Each word's vector after the relation's transformation (see
/// [`head_transform`]), in input order.
pub fn contextualise_words(ck: &Checkpoint, words: &[u32], relation: u32) -> Result<Vec<Vec<f64>>> {
    words.iter().map(|&w| head_transform(&ck.params, w, relation)).collect()
}
