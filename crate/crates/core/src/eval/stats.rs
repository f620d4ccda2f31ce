use crate::error::{Error, Result};

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `ZeroVariance` if either input is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson over average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: xs.len(),
            total: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::Invariant("NaN in correlation input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_correct(pvals: &[f64]) -> Vec<f64> {
    let m = pvals.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (j, &i) in idx.iter().enumerate() {
        let adj = ((m - j) as f64 * pvals[i]).min(1.0);
        running = running.max(adj);
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedAggregate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(#seeds)`; `None` for one seed.
    pub se: Option<f64>,
}

pub fn aggregate_seeds(values: &[f64]) -> Option<SeedAggregate> {
    if values.is_empty() {
        return None;
    }
    let s = values.len() as f64;
    let mean = values.iter().sum::<f64>() / s;
    let se = (values.len() > 1).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1.0);
        var.sqrt() / s.sqrt()
    });
    Some(SeedAggregate { mean, se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn spearman_examples() {
        let xs = [1.0, 5.0, 2.0, 9.0];
        assert_abs_diff_eq!(spearman(&xs, &xs).unwrap(), 1.0, epsilon = 1e-15);
        let rev: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_abs_diff_eq!(spearman(&xs, &rev).unwrap(), -1.0, epsilon = 1e-15);
        // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4)
        let r = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r, 4.5 / (4.5f64.sqrt() * 5f64.sqrt()), epsilon = 1e-12);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn holm_examples() {
        assert_eq!(holm_correct(&[0.3]), vec![0.3]);
        let h = holm_correct(&[0.01, 0.04]);
        assert_abs_diff_eq!(h[0], 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(h[1], 0.04, epsilon = 1e-15);
        assert_eq!(holm_correct(&[0.9, 0.8]), vec![1.0, 1.0]);
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate_seeds(&[0.4, 0.4, 0.4]).unwrap();
        assert_abs_diff_eq!(a.mean, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(a.se.unwrap(), 0.0, epsilon = 1e-15);
        let b = aggregate_seeds(&[0.3, 0.4, 0.5]).unwrap();
        assert_abs_diff_eq!(b.se.unwrap(), 0.1 / 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(aggregate_seeds(&[0.7]).unwrap().se, None);
        assert!(aggregate_seeds(&[]).is_none());
    }

    proptest! {
        #[test]
        fn spearman_monotone_invariant(xs in prop::collection::vec(-100.0f64..100.0, 3..30), seed in 0u64..100) {
            let mut rng = crate::rng::Rng::new(seed);
            let ys: Vec<f64> = xs.iter().map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
            if let Ok(r) = spearman(&xs, &ys) {
                let tx: Vec<f64> = xs.iter().map(|x| x.powi(3) + 2.0 * x).collect();
                let ty: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
                prop_assert!((spearman(&tx, &ty).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn holm_never_lowers(ps in prop::collection::vec(0.0f64..=1.0, 1..20)) {
            let adj = holm_correct(&ps);
            let mut idx: Vec<usize> = (0..ps.len()).collect();
            idx.sort_by(|&a, &b| ps[a].total_cmp(&ps[b]));
            for w in idx.windows(2) {
                prop_assert!(adj[w[0]] <= adj[w[1]]);
            }
            for (a, p) in adj.iter().zip(&ps) {
                prop_assert!(a >= p && *a <= 1.0);
            }
        }
    }
}
