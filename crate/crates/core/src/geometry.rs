//! Numeric kernels shared by every model: Givens rotation and reflection on
//! coordinate pairs, attention mixing, squared distance, cosine, sigmoid.
//!
//! The checked functions validate dimensions and allocate; the `*_into`
//! variants write into caller buffers and only `debug_assert!` shapes, for use
//! in the training hot path.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Scalar type the kernels are generic over (`f32` for storage and training,
/// `f64` for oracle checks).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + Sum + AddAssign + SubAssign + MulAssign + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Per-relation angles for a block-diagonal Givens map: one angle per
/// coordinate pair, so `len == dim / 2`.
#[derive(Debug, Clone, Copy)]
pub struct AngleVec<'a, F>(&'a [F]);

impl<'a, F: Real> AngleVec<'a, F> {
    pub fn new(values: &'a [F], dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) {
            return Err(Error::OddDim {
                kind: "Givens transform",
                dim,
            });
        }
        if values.len() != dim / 2 {
            return Err(Error::DimMismatch {
                left: values.len() * 2,
                right: dim,
            });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &'a [F] {
        self.0
    }
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// Rotates each pair `(x[2i], x[2i+1])` by `theta[i]`.
pub fn givens_rotate<F: Real>(theta: AngleVec<'_, F>, x: &[F]) -> Result<Vec<F>> {
    check_same(theta.0.len() * 2, x.len())?;
    let mut out = vec![F::zero(); x.len()];
    rotate_into(theta.0, x, &mut out);
    Ok(out)
}

/// Reflects each pair `(x[2i], x[2i+1])` across the line at angle `phi[i] / 2`.
pub fn givens_reflect<F: Real>(phi: AngleVec<'_, F>, x: &[F]) -> Result<Vec<F>> {
    check_same(phi.0.len() * 2, x.len())?;
    let mut out = vec![F::zero(); x.len()];
    reflect_into(phi.0, x, &mut out);
    Ok(out)
}

pub fn rotate_into<F: Real>(theta: &[F], x: &[F], out: &mut [F]) {
    debug_assert_eq!(theta.len() * 2, x.len());
    debug_assert_eq!(x.len(), out.len());
    for (i, &a) in theta.iter().enumerate() {
        let (s, c) = a.sin_cos();
        let (x0, x1) = (x[2 * i], x[2 * i + 1]);
        out[2 * i] = c * x0 - s * x1;
        out[2 * i + 1] = s * x0 + c * x1;
    }
}

pub fn reflect_into<F: Real>(phi: &[F], x: &[F], out: &mut [F]) {
    debug_assert_eq!(phi.len() * 2, x.len());
    debug_assert_eq!(x.len(), out.len());
    for (i, &a) in phi.iter().enumerate() {
        let (s, c) = a.sin_cos();
        let (x0, x1) = (x[2 * i], x[2 * i + 1]);
        out[2 * i] = c * x0 + s * x1;
        out[2 * i + 1] = s * x0 - c * x1;
    }
}

/// Softmax over `(a·x, a·y)`, max-subtracted.
pub fn attention_weights<F: Real>(x: &[F], y: &[F], a: &[F]) -> (F, F) {
    let sx = dot(a, x);
    let sy = dot(a, y);
    let m = sx.max(sy);
    let ex = (sx - m).exp();
    let ey = (sy - m).exp();
    let z = ex + ey;
    (ex / z, ey / z)
}

/// `alpha_x * x + alpha_y * y` with `(alpha_x, alpha_y) = softmax(a·x, a·y)`.
pub fn attention_combine<F: Real>(x: &[F], y: &[F], a: &[F]) -> Result<Vec<F>> {
    check_same(x.len(), y.len())?;
    check_same(x.len(), a.len())?;
    let (ax, ay) = attention_weights(x, y, a);
    Ok(x.iter().zip(y).map(|(&xi, &yi)| ax * xi + ay * yi).collect())
}

pub fn dot<F: Real>(x: &[F], y: &[F]) -> F {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

pub fn norm<F: Real>(x: &[F]) -> F {
    dot(x, x).sqrt()
}

/// `sum_i (x_i - y_i)^2`.
pub fn sq_dist<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    check_same(x.len(), y.len())?;
    Ok(sq_dist_unchecked(x, y))
}

pub(crate) fn sq_dist_unchecked<F: Real>(x: &[F], y: &[F]) -> F {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Cosine similarity accumulated in `f64`. A zero vector on either side gives 0.
pub fn cosine<F: Real>(x: &[F], y: &[F]) -> Result<f64> {
    check_same(x.len(), y.len())?;
    Ok(cosine_checked(x, y).unwrap_or(0.0))
}

/// `None` when either vector has zero norm.
pub fn cosine_checked<F: Real>(x: &[F], y: &[F]) -> Option<f64> {
    let (mut xy, mut xx, mut yy) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let a = a.to_f64().unwrap_or(f64::NAN);
        let b = b.to_f64().unwrap_or(f64::NAN);
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        None
    } else {
        // sqrt(xx * yy) is exact when x == y, so identical vectors give 1.
        Some((xy / (xx * yy).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Logistic function, branch-stable for large `|z|`.
pub fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `log(sigmoid(z))` without overflow: `-softplus(-z)`.
pub fn log_sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}
