use crate::ingest::NegTable;
use crate::rng::Rng;
use crate::triple::Triple;

pub const MAX_REDRAWS: usize = 100;

/// `k` corrupted copies of `tr` with the tail replaced by draws from `table`.
/// A draw equal to the true tail is retried up to [`MAX_REDRAWS`] times and
/// then kept.
pub fn sample_negatives(tr: Triple, k: usize, table: &NegTable, rng: &mut Rng) -> Vec<Triple> {
    let mut tails = Vec::with_capacity(k);
    sample_tails_into(tr.t, k, table, rng, &mut tails);
    tails.into_iter().map(|t| Triple::new(tr.h, tr.r, t)).collect()
}

/// Tail ids only, appended after clearing `out`.
pub fn sample_tails_into(true_t: u32, k: usize, table: &NegTable, rng: &mut Rng, out: &mut Vec<u32>) {
    out.clear();
    for _ in 0..k {
        let mut t = table.sample(rng);
        let mut attempts = 0;
        while t == true_t && attempts < MAX_REDRAWS {
            t = table.sample(rng);
            attempts += 1;
        }
        out.push(t);
    }
}
