//! Loss families over one positive score and its negatives, with derivatives
//! with respect to each score.

use super::config::LossMode;
use crate::geometry::{log_sigmoid, sigmoid};

/// `-log σ(pos) - Σ log σ(-neg)`.
pub fn loss_sgns(pos: f64, negs: &[f64]) -> f64 {
    -log_sigmoid(pos) - negs.iter().map(|&n| log_sigmoid(-n)).sum::<f64>()
}

/// `-log σ(pos) - Σ log(1 - σ(neg))`. Since `1 - σ(z) = σ(-z)` this equals
/// [`loss_sgns`]; `log(1 - σ(z))` is evaluated through that identity so large
/// scores do not round `1 - σ` to zero.
pub fn loss_bernoulli(pos: f64, negs: &[f64]) -> f64 {
    -log_sigmoid(pos) - negs.iter().map(|&n| log_one_minus_sigmoid(n)).sum::<f64>()
}

fn log_one_minus_sigmoid(z: f64) -> f64 {
    if z < 0.0 {
        (-sigmoid(z)).ln_1p()
    } else {
        log_sigmoid(-z)
    }
}

/// `-pos + log Σ exp(candidates)` over the positive and its negatives.
pub fn loss_softmax_ce(pos: f64, negs: &[f64]) -> f64 {
    -pos + logsumexp(pos, negs)
}

fn logsumexp(pos: f64, negs: &[f64]) -> f64 {
    let m = negs.iter().copied().fold(pos, f64::max);
    if m == f64::INFINITY {
        return m;
    }
    let s = (pos - m).exp() + negs.iter().map(|&n| (n - m).exp()).sum::<f64>();
    m + s.ln()
}

/// Loss for `mode` and its derivatives: returns `(loss, d/d pos)` and writes
/// `d/d neg_j` into `dnegs`.
pub fn loss_and_grad(mode: LossMode, pos: f64, negs: &[f64], dnegs: &mut [f64]) -> (f64, f64) {
    debug_assert_eq!(negs.len(), dnegs.len());
    match mode {
        LossMode::Sgns | LossMode::BernoulliNll => {
            for (d, &n) in dnegs.iter_mut().zip(negs) {
                *d = sigmoid(n);
            }
            let loss = match mode {
                LossMode::Sgns => loss_sgns(pos, negs),
                _ => loss_bernoulli(pos, negs),
            };
            (loss, -sigmoid(-pos))
        }
        LossMode::SoftmaxCe => {
            let lse = logsumexp(pos, negs);
            for (d, &n) in dnegs.iter_mut().zip(negs) {
                *d = (n - lse).exp();
            }
            (lse - pos, (pos - lse).exp() - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use approx::assert_abs_diff_eq;

    fn naive_log_sigmoid(z: f64) -> f64 {
        (1.0 / (1.0 + (-z).exp())).ln()
    }

    #[test]
    fn sgns_examples() {
        assert_abs_diff_eq!(loss_sgns(0.0, &[0.0]), 2.0 * 2f64.ln(), epsilon = 1e-12);
        assert!(loss_sgns(1e3, &[-1e3, -1e3]) < 1e-12);
        let mut rng = Rng::new(1);
        for _ in 0..200 {
            let pos = rng.uniform_f64(-5.0, 5.0);
            let negs: Vec<f64> = (0..5).map(|_| rng.uniform_f64(-5.0, 5.0)).collect();
            let oracle = -naive_log_sigmoid(pos) - negs.iter().map(|&n| naive_log_sigmoid(-n)).sum::<f64>();
            assert_abs_diff_eq!(loss_sgns(pos, &negs), oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn bernoulli_matches_sgns() {
        let mut rng = Rng::new(2);
        for _ in 0..1000 {
            let pos = rng.uniform_f64(-30.0, 30.0);
            let negs: Vec<f64> = (0..4).map(|_| rng.uniform_f64(-30.0, 30.0)).collect();
            assert_abs_diff_eq!(loss_bernoulli(pos, &negs), loss_sgns(pos, &negs), epsilon = 1e-12);
        }
        // σ(1) = 0.7310585786
        assert_abs_diff_eq!(
            loss_bernoulli(1.0, &[-1.0]),
            -2.0 * 0.7310585786300049f64.ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(loss_bernoulli(0.3, &[]), -naive_log_sigmoid(0.3), epsilon = 1e-15);
    }

    #[test]
    fn softmax_examples() {
        assert_abs_diff_eq!(loss_softmax_ce(0.7, &[0.7]), 2f64.ln(), epsilon = 1e-15);
        assert!(loss_softmax_ce(100.0, &[-100.0, 0.0]) < 1e-40);
        let mut rng = Rng::new(3);
        for _ in 0..200 {
            let pos = rng.uniform_f64(-20.0, 20.0);
            let negs: Vec<f64> = (0..6).map(|_| rng.uniform_f64(-20.0, 20.0)).collect();
            let z: f64 = pos.exp() + negs.iter().map(|n| n.exp()).sum::<f64>();
            assert_abs_diff_eq!(loss_softmax_ce(pos, &negs), -pos + z.ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = Rng::new(4);
        let h = 1e-6;
        for mode in [LossMode::Sgns, LossMode::BernoulliNll, LossMode::SoftmaxCe] {
            let f = |p: f64, n: &[f64]| match mode {
                LossMode::Sgns => loss_sgns(p, n),
                LossMode::BernoulliNll => loss_bernoulli(p, n),
                LossMode::SoftmaxCe => loss_softmax_ce(p, n),
            };
            for _ in 0..50 {
                let pos = rng.uniform_f64(-3.0, 3.0);
                let negs: Vec<f64> = (0..3).map(|_| rng.uniform_f64(-3.0, 3.0)).collect();
                let mut dn = vec![0.0; 3];
                let (l, dp) = loss_and_grad(mode, pos, &negs, &mut dn);
                assert_abs_diff_eq!(l, f(pos, &negs), epsilon = 1e-12);
                let fd = (f(pos + h, &negs) - f(pos - h, &negs)) / (2.0 * h);
                assert_abs_diff_eq!(dp, fd, epsilon = 1e-6);
                for j in 0..3 {
                    let mut up = negs.clone();
                    let mut down = negs.clone();
                    up[j] += h;
                    down[j] -= h;
                    assert_abs_diff_eq!(dn[j], (f(pos, &up) - f(pos, &down)) / (2.0 * h), epsilon = 1e-6);
                }
            }
        }
    }
}
