//! Per-model score functions and their analytic gradients over a borrowed
//! view of the rows one triple touches.
//!
//! Every score is "higher = more plausible":
//!
//! * DM: `e_h . (W_r e'_t)`
//! * MuRE: `-|W_r o e_h - (e_t + w_r)|^2 + b_h + b_t`
//! * RotE / RefE: `-|G_r e_h + t_r - e_t|^2 + b_h + b_t` with `G_r` a Givens rotation / reflection
//! * AttE: `-|Att(Rot e_h, Ref e_h; a_r) + p_r - e_t|^2 + b_h + b_t`

use crate::geometry::{attention_weights, dot, reflect_into, rotate_into, sq_dist_unchecked, Real};
use crate::triple::ModelKind;

pub const MAX_REL_SLOTS: usize = 4;

/// Rows read by one triple. Unused relation slots are empty slices.
#[derive(Debug, Clone, Copy)]
pub struct TripleView<'a, F> {
    pub head: &'a [F],
    pub tail: &'a [F],
    pub rel: [&'a [F]; MAX_REL_SLOTS],
    pub bias_h: F,
    pub bias_t: F,
}

/// Gradient of one triple's score (times an upstream factor), shaped like
/// [`TripleView`]. Buffers are reused across calls.
#[derive(Debug, Clone)]
pub struct TripleGrad<F> {
    pub head: Vec<F>,
    pub tail: Vec<F>,
    pub rel: [Vec<F>; MAX_REL_SLOTS],
    pub bias_h: F,
    pub bias_t: F,
    q_rot: Vec<F>,
    q_ref: Vec<F>,
    tmp: Vec<F>,
}

impl<F: Real> TripleGrad<F> {
    pub fn new(kind: ModelKind, dim: usize) -> Self {
        let half = dim / 2;
        let rel_cols: [usize; MAX_REL_SLOTS] = match kind {
            ModelKind::Dm => [dim * dim, 0, 0, 0],
            ModelKind::Mure => [dim, dim, 0, 0],
            ModelKind::RotE | ModelKind::RefE => [half, dim, 0, 0],
            ModelKind::AttE => [half, half, dim, dim],
        };
        Self {
            head: vec![F::zero(); dim],
            tail: vec![F::zero(); dim],
            rel: rel_cols.map(|c| vec![F::zero(); c]),
            bias_h: F::zero(),
            bias_t: F::zero(),
            q_rot: vec![F::zero(); dim],
            q_ref: vec![F::zero(); dim],
            tmp: vec![F::zero(); dim],
        }
    }

    pub fn rel_slots(&self) -> usize {
        self.rel.iter().take_while(|r| !r.is_empty()).count()
    }
}

/// Score of the triple described by `v`.
pub fn score<F: Real>(kind: ModelKind, v: &TripleView<'_, F>, scratch: &mut TripleGrad<F>) -> F {
    let n = v.head.len();
    match kind {
        ModelKind::Dm => {
            let w = v.rel[0];
            let mut u = F::zero();
            for i in 0..n {
                u += v.head[i] * dot(&w[i * n..(i + 1) * n], v.tail);
            }
            u
        }
        ModelKind::Mure => {
            let (d, w) = (v.rel[0], v.rel[1]);
            let mut s = F::zero();
            for i in 0..n {
                let delta = d[i] * v.head[i] - v.tail[i] - w[i];
                s += delta * delta;
            }
            -s + v.bias_h + v.bias_t
        }
        ModelKind::RotE | ModelKind::RefE | ModelKind::AttE => {
            let q = &mut scratch.tmp;
            head_query(kind, v, q, &mut scratch.q_rot, &mut scratch.q_ref);
            -sq_dist_unchecked(q, v.tail) + v.bias_h + v.bias_t
        }
    }
}

/// Head-side query for the Givens models: `G_r e_h + translation`.
/// `q_rot`/`q_ref` receive the pre-attention rotated/reflected heads (AttE).
fn head_query<F: Real>(kind: ModelKind, v: &TripleView<'_, F>, q: &mut [F], q_rot: &mut [F], q_ref: &mut [F]) {
    match kind {
        ModelKind::RotE => {
            rotate_into(v.rel[0], v.head, q);
            for (qi, &ti) in q.iter_mut().zip(v.rel[1]) {
                *qi += ti;
            }
        }
        ModelKind::RefE => {
            reflect_into(v.rel[0], v.head, q);
            for (qi, &ti) in q.iter_mut().zip(v.rel[1]) {
                *qi += ti;
            }
        }
        ModelKind::AttE => {
            rotate_into(v.rel[0], v.head, q_rot);
            reflect_into(v.rel[1], v.head, q_ref);
            let (ar, af) = attention_weights(q_rot, q_ref, v.rel[3]);
            for i in 0..q.len() {
                q[i] = ar * q_rot[i] + af * q_ref[i] + v.rel[2][i];
            }
        }
        _ => unreachable!("head_query on {kind}"),
    }
}

/// Writes `upstream * d score / d param` for every row in `v` into `g`
/// (overwriting), and returns the score.
pub fn score_and_grad<F: Real>(kind: ModelKind, v: &TripleView<'_, F>, upstream: F, g: &mut TripleGrad<F>) -> F {
    let n = v.head.len();
    let two = F::of(2.0);
    match kind {
        ModelKind::Dm => {
            let w = v.rel[0];
            let gw = &mut g.rel[0];
            g.tail.iter_mut().for_each(|x| *x = F::zero());
            let mut u = F::zero();
            for i in 0..n {
                let row = &w[i * n..(i + 1) * n];
                let wt = dot(row, v.tail);
                u += v.head[i] * wt;
                g.head[i] = upstream * wt;
                let hi = upstream * v.head[i];
                for j in 0..n {
                    g.tail[j] += hi * row[j];
                    gw[i * n + j] = hi * v.tail[j];
                }
            }
            g.bias_h = F::zero();
            g.bias_t = F::zero();
            u
        }
        ModelKind::Mure => {
            let (d, w) = (v.rel[0], v.rel[1]);
            let mut s = F::zero();
            for i in 0..n {
                let delta = d[i] * v.head[i] - v.tail[i] - w[i];
                s += delta * delta;
                // d(-delta^2)/d delta = -2 delta
                let gd = -two * delta * upstream;
                g.head[i] = gd * d[i];
                g.rel[0][i] = gd * v.head[i];
                g.tail[i] = -gd;
                g.rel[1][i] = -gd;
            }
            g.bias_h = upstream;
            g.bias_t = upstream;
            -s + v.bias_h + v.bias_t
        }
        ModelKind::RotE | ModelKind::RefE => {
            let TripleGrad {
                head,
                tail,
                rel,
                tmp,
                q_rot,
                q_ref,
                ..
            } = g;
            head_query(kind, v, tmp, q_rot, q_ref);
            let s = -sq_dist_unchecked(tmp, v.tail) + v.bias_h + v.bias_t;
            // gq = d score / d q = -2 (q - e_t), scaled.
            for i in 0..n {
                let gq = -two * (tmp[i] - v.tail[i]) * upstream;
                tmp[i] = gq;
                tail[i] = -gq;
                rel[1][i] = gq;
            }
            givens_backward(kind, v.rel[0], v.head, tmp, head, &mut rel[0]);
            g.bias_h = upstream;
            g.bias_t = upstream;
            s
        }
        ModelKind::AttE => {
            let TripleGrad {
                head,
                tail,
                rel,
                tmp,
                q_rot,
                q_ref,
                ..
            } = g;
            let a = v.rel[3];
            rotate_into(v.rel[0], v.head, q_rot);
            reflect_into(v.rel[1], v.head, q_ref);
            let (ar, af) = attention_weights(q_rot, q_ref, a);
            let mut s = F::zero();
            for i in 0..n {
                let q = ar * q_rot[i] + af * q_ref[i] + v.rel[2][i];
                let d = q - v.tail[i];
                s += d * d;
                tmp[i] = -two * d * upstream;
            }
            let s = -s + v.bias_h + v.bias_t;
            // Through the softmax: c = ar * af * gq . (q_rot - q_ref).
            let mut c = F::zero();
            for i in 0..n {
                c += tmp[i] * (q_rot[i] - q_ref[i]);
            }
            c *= ar * af;
            let (rot_rel, rest) = rel.split_at_mut(1);
            let (ref_rel, rest) = rest.split_at_mut(1);
            let (trans, att) = rest.split_at_mut(1);
            for i in 0..n {
                let gq = tmp[i];
                tail[i] = -gq;
                trans[0][i] = gq;
                att[0][i] = c * (q_rot[i] - q_ref[i]);
                // Reuse the q buffers for the upstream of each branch.
                q_rot[i] = ar * gq + c * a[i];
                q_ref[i] = af * gq - c * a[i];
            }
            // head gets contributions from both branches.
            givens_backward(ModelKind::RotE, v.rel[0], v.head, q_rot, head, &mut rot_rel[0]);
            let mut head_ref = std::mem::take(tmp);
            givens_backward(ModelKind::RefE, v.rel[1], v.head, q_ref, &mut head_ref, &mut ref_rel[0]);
            for i in 0..n {
                head[i] += head_ref[i];
            }
            *tmp = head_ref;
            g.bias_h = upstream;
            g.bias_t = upstream;
            s
        }
    }
}

/// Back-propagates `gy = d score / d y` through `y = G(angles) x` for one
/// Givens map, writing `d/dx` and `d/d angles`.
fn givens_backward<F: Real>(kind: ModelKind, angles: &[F], x: &[F], gy: &[F], gx: &mut [F], gangles: &mut [F]) {
    for (i, &a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        let (x0, x1) = (x[2 * i], x[2 * i + 1]);
        let (g0, g1) = (gy[2 * i], gy[2 * i + 1]);
        match kind {
            ModelKind::RotE => {
                // y = [[c,-s],[s,c]] x ; dy/da = (-y1, y0)
                let y0 = c * x0 - s * x1;
                let y1 = s * x0 + c * x1;
                gx[2 * i] = c * g0 + s * g1;
                gx[2 * i + 1] = -s * g0 + c * g1;
                gangles[i] = -g0 * y1 + g1 * y0;
            }
            ModelKind::RefE => {
                // y = [[c,s],[s,-c]] x (symmetric); dy/da = (-y1, y0)
                let y0 = c * x0 + s * x1;
                let y1 = s * x0 - c * x1;
                gx[2 * i] = c * g0 + s * g1;
                gx[2 * i + 1] = s * g0 - c * g1;
                gangles[i] = -g0 * y1 + g1 * y0;
            }
            _ => unreachable!(),
        }
    }
}

/// Query form used to score every tail for a fixed (h, r):
/// DM scores `query . e'_t`; distance models score `-|query - e_t|^2 + b_h + b_t`.
pub fn tail_query<F: Real>(kind: ModelKind, v: &TripleView<'_, F>, out: &mut [F]) {
    let n = v.head.len();
    match kind {
        ModelKind::Dm => {
            // W_r^T e_h
            out.iter_mut().for_each(|x| *x = F::zero());
            let w = v.rel[0];
            for i in 0..n {
                let hi = v.head[i];
                for j in 0..n {
                    out[j] += hi * w[i * n + j];
                }
            }
        }
        ModelKind::Mure => {
            for i in 0..n {
                out[i] = v.rel[0][i] * v.head[i] - v.rel[1][i];
            }
        }
        _ => {
            let mut q_rot = vec![F::zero(); n];
            let mut q_ref = vec![F::zero(); n];
            head_query(kind, v, out, &mut q_rot, &mut q_ref);
        }
    }
}
