//! Synthetic inputs shared by the benchmarks.

use syge::ingest::triples_from_strings;
use syge::{Rng, TripleDataset};

/// A random graph of `n_entities` words and `n_base` base relations with
/// `n_edges` edges (inverses added), drawn from `seed`.
pub fn random_graph(n_entities: usize, n_base: usize, n_edges: usize, seed: u64) -> TripleDataset {
    let mut rng = Rng::new(seed);
    let words: Vec<String> = (0..n_entities).map(|i| format!("w{i}")).collect();
    let labels: Vec<String> = (0..n_base).map(|i| format!("r{i}")).collect();
    let edges: Vec<(usize, usize, usize)> = (0..n_edges)
        .map(|_| (rng.below(n_entities), rng.below(n_base), rng.below(n_entities)))
        .collect();
    triples_from_strings(
        edges
            .iter()
            .map(|&(h, r, t)| (words[h].as_str(), labels[r].as_str(), words[t].as_str())),
    )
}
