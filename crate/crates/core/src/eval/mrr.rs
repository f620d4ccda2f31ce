use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Real;
use crate::models::ModelParams;
use crate::triple::Triple;

#[derive(Debug, Clone, PartialEq)]
pub struct MrrReport {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    /// Rank of each test triple's true tail, in input order.
    pub ranks: Vec<usize>,
}

/// Rank of `t` among all tails for `(h, r)`: one plus the number of other
/// candidates, not in `filter`, scoring at least as high. Ties therefore
/// count against the true tail.
pub fn tail_rank(scores: &[f64], tr: Triple, filter: &HashSet<Triple>) -> usize {
    let s = scores[tr.t as usize];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(c, &sc)| {
            c as u32 != tr.t
                && sc.partial_cmp(&s) != Some(Ordering::Less)
                && !filter.contains(&Triple::new(tr.h, tr.r, c as u32))
        })
        .count()
}

/// Filtered tail-prediction ranking over every entity.
pub fn eval_mrr<F: Real>(params: &ModelParams<F>, test: &[Triple], filter: &HashSet<Triple>) -> Result<MrrReport> {
    if test.is_empty() {
        return Err(Error::Config("link-prediction test set is empty".into()));
    }
    for &tr in test {
        params.check_triple(tr)?;
    }
    let ranks: Vec<usize> = test
        .par_iter()
        .map(|&tr| {
            let scores = params.score_all_tails(tr.h, tr.r)?;
            Ok(tail_rank(&scores, tr, filter))
        })
        .collect::<Result<_>>()?;
    let n = ranks.len() as f64;
    let frac = |k: usize| ranks.iter().filter(|&&r| r <= k).count() as f64 / n;
    Ok(MrrReport {
        mrr: ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n,
        hits1: frac(1),
        hits3: frac(3),
        hits10: frac(10),
        ranks,
    })
}
