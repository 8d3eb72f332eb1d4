//! Conditional draw of the stacked VAR coefficients given the error covariance path.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::design::Design;
use super::prior::PriorMoments;
use crate::error::{Error, Result};
use crate::kernels::sample_mvn_from_precision;

/// Per-period inverse error covariance `Sigma_t^{-1}`.
pub enum ErrorPrecision<'a> {
    /// Time-invariant `Sigma^{-1}`.
    Constant(&'a DMatrix<f64>),
    /// `A' diag(inv_variances[t, ..]) A` with `A` unit lower triangular.
    Triangular {
        a: &'a DMatrix<f64>,
        inv_variances: &'a DMatrix<f64>,
    },
    /// `D_t^{-1} R^{-1} D_t^{-1}` with `D_t = diag(1 / inv_std[t, ..])`.
    Correlated {
        corr_inv: &'a DMatrix<f64>,
        inv_std: &'a DMatrix<f64>,
    },
}

fn weighted_gram(x: &DMatrix<f64>, weights: impl Iterator<Item = f64>) -> DMatrix<f64> {
    let mut scaled = x.clone();
    for (mut row, w) in scaled.row_iter_mut().zip(weights) {
        row *= w.sqrt();
    }
    scaled.transpose() * scaled
}

fn apply_precision(precision: &ErrorPrecision<'_>, t: usize, v: &DVector<f64>) -> DVector<f64> {
    match precision {
        ErrorPrecision::Constant(s) => *s * v,
        ErrorPrecision::Triangular { a, inv_variances } => {
            let mut av = *a * v;
            for m in 0..av.len() {
                av[m] *= inv_variances[(t, m)];
            }
            a.transpose() * av
        }
        ErrorPrecision::Correlated { corr_inv, inv_std } => {
            let scaled = DVector::from_fn(v.len(), |i, _| v[i] * inv_std[(t, i)]);
            let mut out = *corr_inv * scaled;
            for i in 0..out.len() {
                out[i] *= inv_std[(t, i)];
            }
            out
        }
    }
}

/// Draws `beta` from its Gaussian full conditional, returning `(draw, mean)`.
pub fn draw_coefficients<R: Rng + ?Sized>(
    rng: &mut R,
    design: &Design,
    prior: &PriorMoments,
    precision: &ErrorPrecision<'_>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (t, n) = design.y.shape();
    let k = design.n_regressors();
    let x = &design.x;
    let mut post = DMatrix::<f64>::zeros(n * k, n * k);

    let mut add_block = |i: usize, j: usize, block: &DMatrix<f64>, coef: f64| {
        if coef == 0.0 {
            return;
        }
        let mut view = post.view_mut((i * k, j * k), (k, k));
        view += block * coef;
    };

    match precision {
        ErrorPrecision::Constant(s) => {
            let gram = x.transpose() * x;
            for i in 0..n {
                for j in 0..n {
                    add_block(i, j, &gram, s[(i, j)]);
                }
            }
        }
        ErrorPrecision::Triangular { a, inv_variances } => {
            for m in 0..n {
                let gram = weighted_gram(x, inv_variances.column(m).iter().copied());
                for i in 0..=m {
                    for j in 0..=m {
                        add_block(i, j, &gram, a[(m, i)] * a[(m, j)]);
                    }
                }
            }
        }
        ErrorPrecision::Correlated { corr_inv, inv_std } => {
            for i in 0..n {
                for j in i..n {
                    let gram = weighted_gram(x, (0..t).map(|r| inv_std[(r, i)] * inv_std[(r, j)]));
                    add_block(i, j, &gram, corr_inv[(i, j)]);
                    if i != j {
                        add_block(j, i, &gram, corr_inv[(j, i)]);
                    }
                }
            }
        }
    }

    // weighted responses u_t = Sigma_t^{-1} y_t
    let mut u = DMatrix::<f64>::zeros(t, n);
    for r in 0..t {
        let yr = design.y.row(r).transpose();
        u.set_row(r, &apply_precision(precision, r, &yr).transpose());
    }
    let xtu = x.transpose() * u;
    let mut rhs = DVector::zeros(n * k);
    for i in 0..n {
        rhs.rows_mut(i * k, k).copy_from(&xtu.column(i));
    }

    for idx in 0..n * k {
        let prior_prec = 1.0 / prior.variance[idx];
        post[(idx, idx)] += prior_prec;
        rhs[idx] += prior_prec * prior.mean[idx];
    }
    // exact symmetry for the factorization check
    let post = (&post + post.transpose()) * 0.5;
    sample_mvn_from_precision(rng, &post, &rhs).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::Divergence(format!(
            "singular posterior precision for coefficients (pivot {pivot})"
        )),
        other => other,
    })
}

/// `K x N` coefficient matrix with column `i` holding equation `i`.
pub fn coefficient_matrix(beta: &DVector<f64>, k: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(k, n, beta.as_slice())
}

pub fn residuals(design: &Design, beta: &DVector<f64>) -> DMatrix<f64> {
    let b = coefficient_matrix(beta, design.n_regressors(), design.n_series());
    &design.y - &design.x * b
}
