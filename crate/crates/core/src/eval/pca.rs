use crate::error::{Error, Result};
use crate::rng::Rng;

pub const PCA_TOL: f64 = 1e-9;
pub const PCA_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// One row of `k` coordinates per input vector.
    pub coords: Vec<Vec<f64>>,
    /// Unit-length principal axes, each with its first nonzero loading positive.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalue of each component.
    pub variances: Vec<f64>,
    pub total_variance: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalise(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Flips `v` so its first loading with magnitude above `1e-12` is positive.
fn fix_sign(v: &mut [f64]) {
    if let Some(&x) = v.iter().find(|x| x.abs() > 1e-12) {
        if x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

/// Projects mean-centred `vectors` onto the top `k` covariance eigenvectors,
/// found by power iteration with deflation.
///
/// Components beyond the data's rank carry zero variance and are returned as
/// zero coordinates; an input with no variance at all is an error.
pub fn pca_project(vectors: &[Vec<f64>], k: usize) -> Result<Pca> {
    let m = vectors.len();
    if m < k + 1 {
        return Err(Error::RankDeficient(format!(
            "need at least {} vectors, got {m}",
            k + 1
        )));
    }
    let d = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimMismatch {
            left: d,
            right: v.len(),
        });
    }
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= m as f64);
    let centred: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, mu)| x - mu).collect())
        .collect();
    let mut cov = vec![0.0; d * d];
    for v in &centred {
        for i in 0..d {
            let vi = v[i];
            for j in i..d {
                cov[i * d + j] += vi * v[j];
            }
        }
    }
    let denom = (m - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
    }
    let total_variance: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    if total_variance.is_nan() || total_variance <= 0.0 {
        return Err(Error::RankDeficient("input has zero variance".into()));
    }
    let negligible = total_variance * 1e-14;
    let mut rng = Rng::new(0x5eed);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    let mut w = vec![0.0; d];
    for _ in 0..k {
        let mut v: Vec<f64> = (0..d).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..PCA_MAX_ITERS {
            // Keep the iterate orthogonal to components already found.
            for c in &components {
                let p = dot(&v, c);
                v.iter_mut().zip(c).for_each(|(x, ci)| *x -= p * ci);
            }
            normalise(&mut v);
            for i in 0..d {
                w[i] = dot(&cov[i * d..(i + 1) * d], &v);
            }
            for c in &components {
                let p = dot(&w, c);
                w.iter_mut().zip(c).for_each(|(x, ci)| *x -= p * ci);
            }
            lambda = normalise(&mut w);
            if lambda <= negligible {
                lambda = 0.0;
                break;
            }
            let change = v.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            std::mem::swap(&mut v, &mut w);
            if change < PCA_TOL {
                break;
            }
        }
        if lambda == 0.0 {
            // No variance left in this direction; pad with a zero axis.
            components.push(vec![0.0; d]);
            variances.push(0.0);
            continue;
        }
        fix_sign(&mut v);
        components.push(v);
        variances.push(lambda);
    }
    let coords = centred
        .iter()
        .map(|x| components.iter().map(|c| dot(x, c)).collect())
        .collect();
    Ok(Pca {
        coords,
        components,
        variances,
        total_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn collinear_points() {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let t = i as f64 - 1.5;
                vec![1.0 + 2.0 * t, -t, 0.5 * t]
            })
            .collect();
        let p = pca_project(&pts, 2).unwrap();
        assert_abs_diff_eq!(p.variances[0] / p.total_variance, 1.0, epsilon = 1e-9);
        for c in &p.coords {
            assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn projected_mean_is_zero_and_signs_fixed() {
        let mut rng = Rng::new(4);
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|j| rng.uniform_f64(-1.0, 1.0) * (j + 1) as f64).collect())
            .collect();
        let p = pca_project(&pts, 2).unwrap();
        for j in 0..2 {
            let mean: f64 = p.coords.iter().map(|c| c[j]).sum::<f64>() / 30.0;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            let first = p.components[j].iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
        assert!(p.variances[0] >= p.variances[1]);
    }

    #[test]
    fn translation_invariant() {
        let mut rng = Rng::new(5);
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng.uniform_f64(-1.0, 1.0)).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = pts
            .iter()
            .map(|v| v.iter().enumerate().map(|(i, x)| x + 10.0 * i as f64).collect())
            .collect();
        let a = pca_project(&pts, 2).unwrap();
        let b = pca_project(&shifted, 2).unwrap();
        for (x, y) in a.coords.iter().zip(&b.coords) {
            for j in 0..2 {
                assert_abs_diff_eq!(x[j], y[j], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn errors() {
        assert!(pca_project(&[vec![1.0, 2.0], vec![0.0, 1.0]], 2).is_err());
        let same = vec![vec![1.0, 1.0]; 4];
        assert!(matches!(pca_project(&same, 2), Err(Error::RankDeficient(_))));
    }
}
