//! Sparse gradient accumulation and row-wise SGD / Adam updates.

use super::config::Optimizer;
use crate::models::{GradSink, ModelParams};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Dense per-table gradient buffers plus the list of rows touched since the
/// last [`GradAccum::clear`].
#[derive(Debug, Clone)]
pub struct GradAccum {
    cols: Vec<usize>,
    data: Vec<Vec<f32>>,
    touched: Vec<Vec<bool>>,
    rows: Vec<Vec<usize>>,
}

impl GradAccum {
    pub fn for_params(params: &ModelParams<f32>) -> Self {
        let tables = params.tables();
        Self {
            cols: tables.iter().map(|t| t.cols).collect(),
            data: tables.iter().map(|t| vec![0.0; t.data.len()]).collect(),
            touched: tables.iter().map(|t| vec![false; t.rows]).collect(),
            rows: vec![Vec::new(); tables.len()],
        }
    }

    pub fn row(&self, table: usize, row: usize) -> &[f32] {
        let c = self.cols[table];
        &self.data[table][row * c..(row + 1) * c]
    }

    /// Touched rows of `table` in first-touch order.
    pub fn touched_rows(&self, table: usize) -> &[usize] {
        &self.rows[table]
    }

    pub fn clear(&mut self) {
        for t in 0..self.data.len() {
            let c = self.cols[t];
            for &r in &self.rows[t] {
                self.data[t][r * c..(r + 1) * c].fill(0.0);
                self.touched[t][r] = false;
            }
            self.rows[t].clear();
        }
    }
}

impl GradSink<f32> for GradAccum {
    fn add(&mut self, table: usize, row: usize, values: &[f32]) {
        let c = self.cols[table];
        if !self.touched[table][row] {
            self.touched[table][row] = true;
            self.rows[table].push(row);
        }
        for (d, &v) in self.data[table][row * c..(row + 1) * c].iter_mut().zip(values) {
            *d += v;
        }
    }
}

/// Optimizer memory. Adam keeps first/second moments shaped like the
/// parameters and a step counter per row, so bias correction follows how
/// often each row was actually updated.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub kind: Optimizer,
    pub(crate) m: Vec<Vec<f32>>,
    pub(crate) v: Vec<Vec<f32>>,
    pub(crate) steps: Vec<Vec<u32>>,
}

impl OptimizerState {
    pub fn new(kind: Optimizer, params: &ModelParams<f32>) -> Self {
        let tables = params.tables();
        match kind {
            Optimizer::Sgd => Self {
                kind,
                m: Vec::new(),
                v: Vec::new(),
                steps: Vec::new(),
            },
            Optimizer::Adam => Self {
                kind,
                m: tables.iter().map(|t| vec![0.0; t.data.len()]).collect(),
                v: tables.iter().map(|t| vec![0.0; t.data.len()]).collect(),
                steps: tables.iter().map(|t| vec![0; t.rows]).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub rows_updated: u64,
    pub rows_skipped: u64,
}

/// One SGD update of a row: `p -= lr * g`.
pub(crate) fn sgd_row(p: &mut [f32], g: &[f32], lr: f64) {
    for (x, &gi) in p.iter_mut().zip(g) {
        *x = (*x as f64 - lr * gi as f64) as f32;
    }
}

/// One bias-corrected Adam update of a row; `step` is the row's counter
/// after incrementing.
pub(crate) fn adam_row(p: &mut [f32], g: &[f32], m: &mut [f32], v: &mut [f32], step: u32, lr: f64) {
    let bc1 = 1.0 - ADAM_BETA1.powi(step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(step as i32);
    for i in 0..p.len() {
        let gi = g[i] as f64;
        let mi = ADAM_BETA1 * m[i] as f64 + (1.0 - ADAM_BETA1) * gi;
        let vi = ADAM_BETA2 * v[i] as f64 + (1.0 - ADAM_BETA2) * gi * gi;
        m[i] = mi as f32;
        v[i] = vi as f32;
        let update = lr * (mi / bc1) / ((vi / bc2).sqrt() + ADAM_EPS);
        p[i] = (p[i] as f64 - update) as f32;
    }
}

/// Applies the accumulated gradient to every touched row. Rows whose
/// gradient has a non-finite entry are left unchanged and counted.
pub fn apply_step(params: &mut ModelParams<f32>, grads: &GradAccum, state: &mut OptimizerState, lr: f64) -> StepStats {
    let mut stats = StepStats::default();
    for (t, table) in params.tables_mut().iter_mut().enumerate() {
        let c = table.cols;
        for &r in grads.touched_rows(t) {
            let g = grads.row(t, r);
            if g.iter().any(|x| !x.is_finite()) {
                stats.rows_skipped += 1;
                continue;
            }
            let p = &mut table.data[r * c..(r + 1) * c];
            match state.kind {
                Optimizer::Sgd => sgd_row(p, g, lr),
                Optimizer::Adam => {
                    state.steps[t][r] += 1;
                    let step = state.steps[t][r];
                    adam_row(
                        p,
                        g,
                        &mut state.m[t][r * c..(r + 1) * c],
                        &mut state.v[t][r * c..(r + 1) * c],
                        step,
                        lr,
                    );
                }
            }
            stats.rows_updated += 1;
        }
    }
    if stats.rows_skipped > 0 {
        log::warn!("skipped {} rows with non-finite gradients", stats.rows_skipped);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple::ModelKind;
    use approx::assert_abs_diff_eq;

    /// A MuRE model with one entity and dim 1 gives a 1x1 entity table to
    /// optimise directly.
    fn scalar_params(p0: f32) -> ModelParams<f32> {
        let mut p = ModelParams::<f32>::zeros(ModelKind::Mure, 1, 1, 1).unwrap();
        p.tables_mut()[0].data[0] = p0;
        p
    }

    fn step(p: &mut ModelParams<f32>, st: &mut OptimizerState, g: f32, lr: f64) -> StepStats {
        let mut acc = GradAccum::for_params(p);
        acc.add(0, 0, &[g]);
        apply_step(p, &acc, st, lr)
    }

    #[test]
    fn sgd_single_step() {
        let mut p = scalar_params(1.0);
        let mut st = OptimizerState::new(Optimizer::Sgd, &p);
        step(&mut p, &mut st, 0.1, 0.5);
        assert_abs_diff_eq!(p.tables()[0].data[0], 0.95, epsilon = 1e-7);
    }

    #[test]
    fn sgd_on_square_follows_recurrence() {
        let mut p = scalar_params(1.0);
        let mut st = OptimizerState::new(Optimizer::Sgd, &p);
        for _ in 0..10 {
            let x = p.tables()[0].data[0];
            step(&mut p, &mut st, 2.0 * x, 0.1);
        }
        assert_abs_diff_eq!(p.tables()[0].data[0] as f64, 0.8f64.powi(10), epsilon = 1e-6);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        for c in [1e-4f32, 0.3, 7.0, 1e4] {
            let mut p = scalar_params(0.0);
            let mut st = OptimizerState::new(Optimizer::Adam, &p);
            step(&mut p, &mut st, c, 0.01);
            assert_abs_diff_eq!(p.tables()[0].data[0] as f64, -0.01, epsilon = 1e-6);
        }
    }

    #[test]
    fn adam_counts_steps_per_row() {
        let mut p = ModelParams::<f32>::zeros(ModelKind::Mure, 2, 1, 1).unwrap();
        let mut st = OptimizerState::new(Optimizer::Adam, &p);
        let mut acc = GradAccum::for_params(&p);
        acc.add(0, 0, &[1.0]);
        apply_step(&mut p, &acc, &mut st, 0.1);
        acc.clear();
        acc.add(0, 1, &[1.0]);
        apply_step(&mut p, &acc, &mut st, 0.1);
        assert_eq!(st.steps[0], vec![1, 1]);
        // Both rows saw one bias-corrected step of the same size.
        assert_eq!(p.tables()[0].data[0], p.tables()[0].data[1]);
    }

    #[test]
    fn non_finite_rows_skipped() {
        let mut p = scalar_params(1.0);
        let mut st = OptimizerState::new(Optimizer::Sgd, &p);
        let s = step(&mut p, &mut st, f32::NAN, 0.1);
        assert_eq!(s.rows_skipped, 1);
        assert_eq!(p.tables()[0].data[0], 1.0);
    }

    #[test]
    fn untouched_rows_unchanged_and_clear_resets() {
        let mut p = ModelParams::<f32>::zeros(ModelKind::Mure, 3, 1, 2).unwrap();
        let before = p.clone();
        let mut st = OptimizerState::new(Optimizer::Sgd, &p);
        let mut acc = GradAccum::for_params(&p);
        acc.add(0, 1, &[1.0, -1.0]);
        acc.add(0, 1, &[1.0, -1.0]);
        assert_eq!(acc.row(0, 1), &[2.0, -2.0]);
        apply_step(&mut p, &acc, &mut st, 0.5);
        assert_eq!(p.tables()[0].row(0), before.tables()[0].row(0));
        assert_eq!(p.tables()[0].row(1), &[-1.0, 1.0]);
        acc.clear();
        assert!(acc.touched_rows(0).is_empty());
        assert_eq!(acc.row(0, 1), &[0.0, 0.0]);
    }
}
