//! Independent reference implementations shared by the integration tests
//! and the acceptance suite. Nothing here calls the routine it checks.
#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use syge::geometry::Real;
use syge::ingest::triples_from_strings;
use syge::{LossMode, ModelKind, ModelParams, Optimizer, Rng, TrainConfig, Triple, TripleDataset};

/// Randomised f64 parameters with every table perturbed away from its
/// initial value, so biases, translations and context rows all matter.
pub fn random_params(
    kind: ModelKind,
    n_entities: usize,
    n_relations: usize,
    dim: usize,
    rng: &mut Rng,
) -> ModelParams<f64> {
    let mut p = ModelParams::<f64>::init(kind, n_entities, n_relations, dim, false, rng).unwrap();
    for t in p.tables_mut() {
        for x in &mut t.data {
            *x += rng.uniform_f64(-0.8, 0.8);
        }
    }
    p
}

/// Relative error between the analytic gradient of one random triple and
/// central finite differences with step `h` over every parameter of the model.
///
/// The error is `|g - fd| / max(|g| + |fd|, 1e-8)` on the flattened gradient
/// vectors, which stays meaningful when individual entries are near zero.
pub fn fd_relative_error(kind: ModelKind, dim: usize, seed: u64, h: f64) -> f64 {
    let mut rng = Rng::new(seed);
    let (ne, nr) = (5, 3);
    let mut p = random_params(kind, ne, nr, dim, &mut rng);
    let tr = Triple::new(rng.below(ne) as u32, rng.below(nr) as u32, rng.below(ne) as u32);
    let (_, grads) = p.score_and_grad(tr, 1.0).unwrap();
    let mut diff2 = 0.0;
    let mut scale2 = 0.0;
    for table in 0..p.tables().len() {
        let (rows, cols) = (p.tables()[table].rows, p.tables()[table].cols);
        for row in 0..rows {
            let analytic = grads.get(table, row);
            for col in 0..cols {
                let orig = p.tables()[table].row(row)[col];
                p.tables_mut()[table].row_mut(row)[col] = orig + h;
                let up = p.score(tr).unwrap();
                p.tables_mut()[table].row_mut(row)[col] = orig - h;
                let down = p.score(tr).unwrap();
                p.tables_mut()[table].row_mut(row)[col] = orig;
                let fd = (up - down) / (2.0 * h);
                let g = analytic.map_or(0.0, |a| a[col]);
                diff2 += (g - fd).powi(2);
                scale2 += g * g + fd * fd;
            }
        }
    }
    diff2.sqrt() / (2.0 * scale2).sqrt().max(1e-8)
}

/// Textbook average ranks: each value's rank is one plus the number of
/// strictly smaller values plus half the number of other equal values.
pub fn oracle_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
    let sxx: f64 = xs.iter().map(|a| a * a).sum();
    let syy: f64 = ys.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn oracle_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(xs), &oracle_ranks(ys))
}

/// Holm adjustment from its definition: for the hypothesis at sorted
/// position k, `min(1, max_{j <= k} (m - j + 1) p_(j))`. Tied p-values take
/// the smallest position in their tie group.
pub fn oracle_holm(ps: &[f64]) -> Vec<f64> {
    let m = ps.len();
    let pos = |p: f64| 1 + ps.iter().filter(|&&q| q < p).count();
    ps.iter()
        .map(|&pi| {
            ps.iter()
                .filter(|&&pj| pj <= pi)
                .map(|&pj| (m - pos(pj) + 1) as f64 * pj)
                .fold(0.0, f64::max)
                .min(1.0)
        })
        .collect()
}

/// Filtered, tie-pessimistic rank of each test triple, scoring every
/// candidate tail one triple at a time.
pub fn oracle_ranks_mrr<F: Real>(p: &ModelParams<F>, test: &[Triple], filter: &HashSet<Triple>) -> Vec<usize> {
    test.iter()
        .map(|&tr| {
            let s = p.score(tr).unwrap();
            let mut rank = 1;
            for c in 0..p.n_entities() as u32 {
                let cand = Triple::new(tr.h, tr.r, c);
                if c == tr.t || filter.contains(&cand) {
                    continue;
                }
                if p.score(cand).unwrap() >= s {
                    rank += 1;
                }
            }
            rank
        })
        .collect()
}

/// Covariance eigen-decomposition via nalgebra: `(eigenvalues, eigenvectors)`
/// sorted by decreasing eigenvalue, with the sample covariance (`m - 1`).
pub fn oracle_pca(vectors: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let m = vectors.len();
    let d = vectors[0].len();
    let x = DMatrix::from_fn(m, d, |i, j| vectors[i][j]);
    let mean = x.row_mean();
    let centred = DMatrix::from_fn(m, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centred.transpose() * &centred / (m as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vecs, mean.iter().copied().collect())
}

/// Sets every parameter of relation `r` to its neutral value. AttE's
/// reflection branch is never the identity, so its attention vector is set to
/// saturate the softmax onto the (identity) rotation branch for head `h`.
pub fn neutralise(p: &mut ModelParams<f64>, r: u32, h: u32) {
    let n = p.dim();
    match p.kind() {
        ModelKind::Dm => {
            let w = p.relation_part_mut(0, r);
            w.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..n {
                w[i * n + i] = 1.0;
            }
        }
        ModelKind::Mure => {
            p.relation_part_mut(0, r).iter_mut().for_each(|x| *x = 1.0);
            p.relation_part_mut(1, r).iter_mut().for_each(|x| *x = 0.0);
        }
        ModelKind::RotE | ModelKind::RefE => {
            p.relation_part_mut(0, r).iter_mut().for_each(|x| *x = 0.0);
            p.relation_part_mut(1, r).iter_mut().for_each(|x| *x = 0.0);
        }
        ModelKind::AttE => {
            p.relation_part_mut(0, r).iter_mut().for_each(|x| *x = 0.0);
            p.relation_part_mut(1, r).iter_mut().for_each(|x| *x = 0.0);
            p.relation_part_mut(2, r).iter_mut().for_each(|x| *x = 0.0);
            // Rot(0) e - Ref(0) e = (0, 2 e_1, 0, 2 e_3, ...).
            let e = p.entity(h).to_vec();
            let a = p.relation_part_mut(3, r);
            for i in 0..n {
                a[i] = if i % 2 == 1 { 1e6 * e[i] } else { 0.0 };
            }
        }
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Entities `e0..e49` with `r1: i -> i+1 mod 50` and `r2: i -> 2i mod 50`.
pub fn pattern_graph() -> TripleDataset {
    let names: Vec<String> = (0..50).map(|i| format!("e{i}")).collect();
    let mut rows = Vec::new();
    for i in 0..50 {
        rows.push((names[i].as_str(), "r1", names[(i + 1) % 50].as_str()));
        rows.push((names[i].as_str(), "r2", names[(2 * i) % 50].as_str()));
    }
    triples_from_strings(rows)
}

/// `(train, held_out)` with 10% of triples held out.
pub fn pattern_split() -> (TripleDataset, TripleDataset) {
    pattern_graph().split_holdout(0.1, &mut Rng::new(7))
}

/// Pattern-graph settings at n = 32. Every other entity serves as a
/// negative, so epoch losses carry no sampling noise.
pub fn pattern_config(kind: ModelKind) -> TrainConfig {
    let mut cfg = TrainConfig::defaults(kind);
    cfg.dim = 32;
    cfg.epochs = 200;
    cfg.min_count = 0;
    cfg.neg_power = 0.0;
    cfg.optimizer = Optimizer::Sgd;
    cfg.neg_per_pos = 10;
    cfg.full_ce = true;
    match kind {
        ModelKind::Mure => {
            cfg.learning_rate = 0.1;
            cfg.loss_mode = LossMode::BernoulliNll;
            cfg.batch_size = 8;
        }
        _ => {
            cfg.learning_rate = 0.5;
            cfg.loss_mode = LossMode::SoftmaxCe;
            cfg.batch_size = 32;
        }
    }
    cfg
}

pub fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    xs.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}
