//! Triple datasets from dependency-parsed corpora and knowledge-graph files.

mod conllu;
mod dataset;
mod kg;
mod negtable;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use conllu::{open_text, read_conllu, ConlluReader, DependencyArc};
pub use dataset::{
    arcs_to_triples, dataset_stats, extract_triples, triples_from_strings, DatasetStats, ExtractOptions, IngestLog,
    TripleDataset, PUNCT_LABEL,
};
pub use kg::read_kg_tsv;
pub use negtable::{build_neg_table, NegTable};

use crate::error::Result;

/// Reads several CoNLL-U files in parallel and merges them in lexical path
/// order, so the result does not depend on scheduling.
pub fn ingest_conllu_files<P: AsRef<Path> + Sync>(paths: &[P], opts: &ExtractOptions) -> Result<TripleDataset> {
    let mut sorted: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
    sorted.sort();
    let per_file: Vec<Vec<DependencyArc>> = sorted
        .par_iter()
        .map(|p| read_conllu(p)?.collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut arcs = Vec::new();
    let mut offset = 0;
    for file_arcs in per_file {
        let n_sent = file_arcs.iter().map(|a| a.sentence_id + 1).max().unwrap_or(0);
        arcs.extend(file_arcs.into_iter().map(|mut a| {
            a.sentence_id += offset;
            a
        }));
        offset += n_sent;
    }
    Ok(extract_triples(arcs, opts))
}
