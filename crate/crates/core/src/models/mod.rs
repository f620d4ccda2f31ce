//! Model parameters, scoring and analytic gradients.

pub mod kernel;
mod params;

use std::collections::BTreeMap;

pub use kernel::{TripleGrad, TripleView, MAX_REL_SLOTS};
pub use params::{count_params, layout, ModelParams, Table, TableRole, TableSpec};

use crate::error::{Error, Result};
use crate::geometry::{sq_dist_unchecked, Real};
use crate::triple::{ModelKind, Triple};

/// Receives sparse row gradients: `values` is added to row `row` of table `table`.
pub trait GradSink<F> {
    fn add(&mut self, table: usize, row: usize, values: &[F]);
}

/// Row gradients keyed by `(table, row)`; convenient for inspection and tests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseGrads<F> {
    pub rows: BTreeMap<(usize, usize), Vec<F>>,
}

impl<F: Real> GradSink<F> for SparseGrads<F> {
    fn add(&mut self, table: usize, row: usize, values: &[F]) {
        let entry = self
            .rows
            .entry((table, row))
            .or_insert_with(|| vec![F::zero(); values.len()]);
        for (e, &v) in entry.iter_mut().zip(values) {
            *e += v;
        }
    }
}

impl<F: Real> SparseGrads<F> {
    pub fn get(&self, table: usize, row: usize) -> Option<&[F]> {
        self.rows.get(&(table, row)).map(Vec::as_slice)
    }

    pub fn is_all_zero(&self) -> bool {
        self.rows.values().flatten().all(|x| x.is_zero())
    }
}

/// Table indices that each part of a [`TripleGrad`] belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pub tail: usize,
    pub rel: Vec<usize>,
    pub bias: Option<(usize, usize)>,
}

impl Routing {
    pub fn scatter<F: Real>(&self, tr: Triple, g: &TripleGrad<F>, sink: &mut impl GradSink<F>) {
        sink.add(0, tr.h as usize, &g.head);
        sink.add(self.tail, tr.t as usize, &g.tail);
        for (slot, &table) in self.rel.iter().enumerate() {
            sink.add(table, tr.r as usize, &g.rel[slot]);
        }
        if let Some((bh, bt)) = self.bias {
            sink.add(bh, tr.h as usize, &[g.bias_h]);
            sink.add(bt, tr.t as usize, &[g.bias_t]);
        }
    }
}

impl<F: Real> ModelParams<F> {
    pub fn check_triple(&self, tr: Triple) -> Result<()> {
        let ne = self.n_entities();
        if tr.h as usize >= ne {
            return Err(Error::IdOutOfRange {
                what: "head",
                id: tr.h as usize,
                limit: ne,
            });
        }
        if tr.t as usize >= ne {
            return Err(Error::IdOutOfRange {
                what: "tail",
                id: tr.t as usize,
                limit: ne,
            });
        }
        if tr.r as usize >= self.n_relations() {
            return Err(Error::IdOutOfRange {
                what: "relation",
                id: tr.r as usize,
                limit: self.n_relations(),
            });
        }
        Ok(())
    }

    /// Borrowed rows for `tr`. Ids must be in range.
    pub fn view(&self, tr: Triple) -> TripleView<'_, F> {
        let mut rel: [&[F]; MAX_REL_SLOTS] = [&[]; MAX_REL_SLOTS];
        for (slot, r) in rel.iter_mut().zip(0..self.relation_table_indices().len()) {
            *slot = self.relation_part(r, tr.r);
        }
        TripleView {
            head: self.entity(tr.h),
            tail: self.tail_entity(tr.t),
            rel,
            bias_h: self.bias_head(tr.h),
            bias_t: self.bias_tail(tr.t),
        }
    }

    pub fn new_grad_buffer(&self) -> TripleGrad<F> {
        TripleGrad::new(self.kind(), self.dim())
    }

    pub fn score(&self, tr: Triple) -> Result<F> {
        self.check_triple(tr)?;
        let mut scratch = self.new_grad_buffer();
        Ok(kernel::score(self.kind(), &self.view(tr), &mut scratch))
    }

    /// Unchecked score with caller-provided scratch, for hot loops.
    pub fn score_with(&self, tr: Triple, scratch: &mut TripleGrad<F>) -> F {
        kernel::score(self.kind(), &self.view(tr), scratch)
    }

    /// Score and `upstream * d score / d param` for every row the triple touches.
    pub fn score_and_grad(&self, tr: Triple, upstream: F) -> Result<(F, SparseGrads<F>)> {
        self.check_triple(tr)?;
        let mut g = self.new_grad_buffer();
        let s = kernel::score_and_grad(self.kind(), &self.view(tr), upstream, &mut g);
        let mut out = SparseGrads::default();
        self.scatter(tr, &g, &mut out);
        Ok((s, out))
    }

    /// Computes the gradient of `tr` into `g` and returns the score.
    pub fn grad_into(&self, tr: Triple, upstream: F, g: &mut TripleGrad<F>) -> F {
        kernel::score_and_grad(self.kind(), &self.view(tr), upstream, g)
    }

    /// Routes a per-triple gradient to the table rows it belongs to.
    pub fn scatter(&self, tr: Triple, g: &TripleGrad<F>, sink: &mut impl GradSink<F>) {
        self.routing().scatter(tr, g, sink);
    }

    pub fn routing(&self) -> Routing {
        Routing {
            tail: self.tail_table_index(),
            rel: self.relation_table_indices().to_vec(),
            bias: self.bias_table_indices(),
        }
    }

    /// Scores of `(h, r, t)` for every entity `t`, in `f64`.
    pub fn score_all_tails(&self, h: u32, r: u32) -> Result<Vec<f64>> {
        if self.n_entities() == 0 {
            return Ok(Vec::new());
        }
        self.check_triple(Triple::new(h, r, 0))?;
        let view = self.view(Triple::new(h, r, 0));
        let mut q = vec![F::zero(); self.dim()];
        kernel::tail_query(self.kind(), &view, &mut q);
        let bh = self.bias_head(h);
        Ok((0..self.n_entities() as u32)
            .map(|t| {
                let s = match self.kind() {
                    ModelKind::Dm => crate::geometry::dot(&q, self.tail_entity(t)),
                    _ => -sq_dist_unchecked(&q, self.entity(t)) + bh + self.bias_tail(t),
                };
                s.to_f64().unwrap_or(f64::NAN)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn set_row(p: &mut ModelParams<f64>, table: usize, row: usize, vals: &[f64]) {
        p.tables_mut()[table].row_mut(row).copy_from_slice(vals);
    }

    #[test]
    fn mure_zero_distance_scores_zero() {
        let mut p = ModelParams::<f64>::zeros(ModelKind::Mure, 2, 1, 2).unwrap();
        set_row(&mut p, 0, 0, &[0.3, -0.2]);
        set_row(&mut p, 1, 0, &[1.0, 1.0]);
        let s = p.score(Triple::new(0, 0, 0)).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(crate::geometry::sigmoid(s), 0.5);
    }

    #[test]
    fn dm_identity_map() {
        let mut p = ModelParams::<f64>::zeros(ModelKind::Dm, 1, 1, 2).unwrap();
        set_row(&mut p, 0, 0, &[1.0, 0.0]);
        set_row(&mut p, 1, 0, &[1.0, 0.0]);
        set_row(&mut p, 2, 0, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.score(Triple::new(0, 0, 0)).unwrap(), 1.0);
    }

    #[test]
    fn rote_quarter_turn_lands_on_tail() {
        let mut p = ModelParams::<f64>::zeros(ModelKind::RotE, 2, 1, 2).unwrap();
        set_row(&mut p, 0, 0, &[1.0, 0.0]);
        set_row(&mut p, 0, 1, &[0.0, 1.0]);
        set_row(&mut p, 1, 0, &[FRAC_PI_2]);
        assert_abs_diff_eq!(p.score(Triple::new(0, 0, 1)).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dm_all_zero_has_zero_gradients() {
        let p = ModelParams::<f64>::zeros(ModelKind::Dm, 3, 2, 4).unwrap();
        let (_, g) = p.score_and_grad(Triple::new(0, 1, 2), 1.0).unwrap();
        assert!(g.is_all_zero());
    }

    #[test]
    fn mure_bias_gradient_is_one() {
        let p = ModelParams::<f64>::init(ModelKind::Mure, 3, 2, 4, false, &mut Rng::new(0)).unwrap();
        let (_, g) = p.score_and_grad(Triple::new(0, 1, 2), 1.0).unwrap();
        assert_eq!(g.get(3, 0).unwrap(), &[1.0]);
        assert_eq!(g.get(4, 2).unwrap(), &[1.0]);
    }

    #[test]
    fn out_of_range_ids_error() {
        let p = ModelParams::<f32>::zeros(ModelKind::RefE, 3, 2, 4).unwrap();
        assert!(p.score(Triple::new(3, 0, 0)).is_err());
        assert!(p.score(Triple::new(0, 2, 0)).is_err());
        assert!(p.score(Triple::new(0, 0, 9)).is_err());
        assert!(p.score_all_tails(0, 5).is_err());
    }

    #[test]
    fn score_all_tails_agrees_with_score() {
        for kind in ModelKind::ALL {
            let mut rng = Rng::new(3);
            let mut p = ModelParams::<f64>::init(kind, 7, 4, 6, false, &mut rng).unwrap();
            // Perturb zero-initialised tables so every term matters.
            for t in p.tables_mut() {
                for x in &mut t.data {
                    *x += rng.uniform_f64(-0.5, 0.5);
                }
            }
            let all = p.score_all_tails(2, 3).unwrap();
            for t in 0..7 {
                let s = p.score(Triple::new(2, 3, t)).unwrap();
                assert_abs_diff_eq!(all[t as usize], s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn atte_with_matching_branches_equals_rote() {
        // Rot(0) = I and Ref(0) = diag(1, -1) agree on heads whose odd
        // coordinates are zero, so both attention branches coincide.
        let mut rng = Rng::new(8);
        let mut att = ModelParams::<f64>::init(ModelKind::AttE, 4, 2, 4, false, &mut rng).unwrap();
        let mut rot = ModelParams::<f64>::zeros(ModelKind::RotE, 4, 2, 4).unwrap();
        set_row(&mut att, 0, 0, &[0.7, 0.0, -0.4, 0.0]);
        set_row(&mut att, 1, 1, &[0.0, 0.0]);
        set_row(&mut att, 2, 1, &[0.0, 0.0]);
        set_row(&mut att, 3, 1, &[0.1, 0.2, 0.3, 0.4]);
        for e in 0..4 {
            let row = att.tables()[0].row(e).to_vec();
            set_row(&mut rot, 0, e, &row);
            let bh = att.tables()[5].data[e];
            let bt = att.tables()[6].data[e];
            rot.tables_mut()[3].data[e] = bh;
            rot.tables_mut()[4].data[e] = bt;
        }
        set_row(&mut rot, 1, 1, &[0.0, 0.0]);
        set_row(&mut rot, 2, 1, &[0.1, 0.2, 0.3, 0.4]);
        for t in 0..4 {
            let tr = Triple::new(0, 1, t);
            assert_eq!(att.score(tr).unwrap(), rot.score(tr).unwrap());
        }
    }
}
