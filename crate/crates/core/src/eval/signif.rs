use rayon::prelude::*;

use super::stats::spearman;
use crate::error::{Error, Result};
use crate::rng::{mix_seed, Rng};

pub const DEFAULT_BOOTSTRAP: usize = 10_000;
pub const MIN_BOOTSTRAP: usize = 1_000;
/// Redraws allowed per replicate before the comparison is abandoned.
pub const MAX_REDRAWS: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub p_value: f64,
    /// `rho(A, gold) - rho(B, gold)` on the original items.
    pub observed_delta: f64,
    pub replicates: usize,
    /// Resamples redrawn because a rank vector had zero variance.
    pub skipped: usize,
}

/// Paired two-tailed bootstrap of the Spearman difference between two
/// prediction sets on the same items. Replicate `b` draws from a generator
/// seeded with `mix_seed(seed, b)`, so the result does not depend on how
/// replicates are scheduled.
pub fn bootstrap_compare(
    preds_a: &[f64],
    preds_b: &[f64],
    gold: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let m = gold.len();
    if preds_a.len() != m || preds_b.len() != m {
        return Err(Error::DimMismatch {
            left: preds_a.len().max(preds_b.len()),
            right: m,
        });
    }
    if m < 2 {
        return Err(Error::InsufficientCoverage { covered: m, total: m });
    }
    if replicates < MIN_BOOTSTRAP {
        return Err(Error::Config(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP} replicates, got {replicates}"
        )));
    }
    let observed_delta = spearman(preds_a, gold)? - spearman(preds_b, gold)?;
    let draws: Vec<Result<(f64, usize)>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = Rng::new(mix_seed(seed, b as u64));
            let mut a = vec![0.0; m];
            let mut bb = vec![0.0; m];
            let mut g = vec![0.0; m];
            for attempt in 0..=MAX_REDRAWS {
                for i in 0..m {
                    let k = rng.below(m);
                    a[i] = preds_a[k];
                    bb[i] = preds_b[k];
                    g[i] = gold[k];
                }
                match (spearman(&a, &g), spearman(&bb, &g)) {
                    (Ok(ra), Ok(rb)) => return Ok((ra - rb, attempt)),
                    (Err(Error::ZeroVariance), _) | (_, Err(Error::ZeroVariance)) => continue,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            Err(Error::ZeroVariance)
        })
        .collect();
    let mut le = 0usize;
    let mut ge = 0usize;
    let mut skipped = 0usize;
    for d in draws {
        let (delta, redraws) = d?;
        skipped += redraws;
        if delta <= 0.0 {
            le += 1;
        }
        if delta >= 0.0 {
            ge += 1;
        }
    }
    let b = replicates as f64;
    let p_value = (2.0 * (le as f64 / b).min(ge as f64 / b)).min(1.0);
    Ok(BootstrapResult {
        p_value,
        observed_delta,
        replicates,
        skipped,
    })
}
