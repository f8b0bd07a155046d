//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations, and
//! the rank-revealing solves built on it.
//!
//! Jacobi is slow for large matrices but computes small singular values and
//! their vectors to high relative accuracy, which is what the chain
//! construction at a defective eigenvalue depends on.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::{CVector, ComplexMatrix};
use super::real::{cabs, Real};
use super::LinalgError;

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// `a = U diag(s) V^H` with `s` sorted descending.
///
/// For an `m x n` input `U` is `m x k` and `V` is `n x k` with `k = min(m, n)`.
#[derive(Clone, Debug)]
pub struct Svd<T: Real = f64> {
    pub singular_values: Vec<T>,
    /// Columns are right singular vectors.
    pub right: ComplexMatrix<T>,
    /// Columns are left singular vectors.
    pub left: ComplexMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn sigma_min(&self) -> T {
        self.singular_values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let k = self.singular_values.len();
        let (m, n) = (self.left.rows(), self.right.rows());
        ComplexMatrix::from_fn(m, n, |i, j| {
            (0..k).fold(Complex::zero(), |acc, l| {
                acc + self.left[(i, l)] * self.right[(j, l)].conj() * self.singular_values[l]
            })
        })
    }
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * *y)
}

fn norm_sq<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
}

pub fn vector_norm<T: Real>(a: &[Complex<T>]) -> T {
    norm_sq(a).sqrt()
}

/// Applies `[x, y] <- [c x - s e y, s x + c e y]` to a pair of columns.
fn rotate<T: Real>(x: &mut [Complex<T>], y: &mut [Complex<T>], c: T, s: T, phase_conj: Complex<T>) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let b = *yi * phase_conj;
        let a = *xi;
        *xi = a * c - b * s;
        *yi = a * s + b * c;
    }
}

/// Thin SVD of any finite matrix.
pub fn svd<T: Real>(a: &ComplexMatrix<T>) -> Result<Svd<T>, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { singular_values: t.singular_values, right: t.left, left: t.right });
    }
    let (m, n) = a.shape();
    let mut w: Vec<CVector<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<CVector<T>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { Complex::one() } else { Complex::zero() }).collect()).collect();

    let tol = T::epsilon() * T::from_f64(m as f64);
    // Columns below this squared norm are rounding noise; rotating them
    // against each other never converges in a relative sense.
    let noise = {
        let f = a.frobenius() * T::epsilon();
        f * f
    };
    let half = T::from_f64(0.5);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norm_sq(&w[i]);
                let beta = norm_sq(&w[j]);
                let gamma = dot(&w[i], &w[j]);
                let g = cabs(gamma);
                if g.is_zero() || alpha <= noise || beta <= noise || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) * half / g;
                let root = (T::one() + zeta * zeta).sqrt();
                let t = if zeta >= T::zero() { T::one() / (zeta + root) } else { -T::one() / (-zeta + root) };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let phase_conj = Complex::new(gamma.re / g, -gamma.im / g);
                let (lo, hi) = w.split_at_mut(j);
                rotate(&mut lo[i], &mut hi[0], c, s, phase_conj);
                let (lo, hi) = v.split_at_mut(j);
                rotate(&mut lo[i], &mut hi[0], c, s, phase_conj);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { iterations: MAX_SWEEPS });
    }

    let mut order: Vec<(T, usize)> = w.iter().enumerate().map(|(j, col)| (vector_norm(col), j)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let sigma_max = order[0].0;

    let mut left: Vec<Option<CVector<T>>> = Vec::with_capacity(n);
    let mut right = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let floor = sigma_max * T::epsilon();
    for (k, &(sigma, j)) in order.iter().enumerate() {
        values.push(sigma);
        right.set_column(k, &v[j]);
        if sigma > floor && !sigma.is_zero() {
            left.push(Some(w[j].iter().map(|z| *z / sigma).collect()));
        } else {
            left.push(None);
        }
    }
    let left = complete_orthonormal(m, left);
    Ok(Svd { singular_values: values, right, left: ComplexMatrix::from_columns(&left)? })
}

/// Fills missing columns with unit vectors orthogonal to the present ones.
fn complete_orthonormal<T: Real>(m: usize, cols: Vec<Option<CVector<T>>>) -> Vec<CVector<T>> {
    let mut basis: Vec<CVector<T>> = cols.iter().flatten().cloned().collect();
    let project_out = |basis: &[CVector<T>], mut e: CVector<T>| {
        for _ in 0..2 {
            for b in basis {
                let p = dot(b, &e);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei = *ei - *bi * p;
                }
            }
        }
        e
    };
    let mut out = Vec::with_capacity(cols.len());
    for col in cols {
        if let Some(c) = col {
            out.push(c);
            continue;
        }
        let best = (0..m)
            .map(|k| {
                let e: CVector<T> = (0..m).map(|i| if i == k { Complex::one() } else { Complex::zero() }).collect();
                project_out(&basis, e)
            })
            .max_by(|x, y| vector_norm(x).partial_cmp(&vector_norm(y)).unwrap_or(std::cmp::Ordering::Equal))
            .expect("completion needs at least one row");
        let nrm = vector_norm(&best);
        let e: CVector<T> = best.into_iter().map(|z| z / nrm).collect();
        basis.push(e.clone());
        out.push(e);
    }
    out
}

/// Orthonormal basis of the numerical kernel of a square matrix: the right
/// singular vectors whose singular value is at most `tol * sigma_max`.
pub fn null_space<T: Real>(a: &ComplexMatrix<T>, tol: T) -> Result<Vec<CVector<T>>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let d = svd(a)?;
    let cutoff = tol * d.sigma_max();
    Ok(d.singular_values.iter().enumerate().filter(|(_, s)| **s <= cutoff).map(|(k, _)| d.right.column(k)).collect())
}

/// Minimum-norm least-squares solution of `a x = b` via the SVD truncated at
/// `tol * sigma_max`. Fails when the residual exceeds `10 tol sigma_max |b|`.
pub fn min_norm_solve<T: Real>(a: &ComplexMatrix<T>, b: &[Complex<T>], tol: T) -> Result<CVector<T>, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch { op: "min_norm_solve", left: a.shape(), right: (b.len(), 1) });
    }
    let d = svd(a)?;
    let smax = d.sigma_max();
    let cutoff = tol * smax;
    let mut x: CVector<T> = vec![Complex::zero(); a.cols()];
    for (k, &sigma) in d.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma.is_zero() {
            continue;
        }
        let uk = d.left.column(k);
        let coef = dot(&uk, b) / sigma;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = *xi + d.right[(i, k)] * coef;
        }
    }
    let ax = a.matvec(&x)?;
    let resid: CVector<T> = ax.iter().zip(b).map(|(p, q)| *p - *q).collect();
    let residual = vector_norm(&resid);
    let threshold = T::from_f64(10.0) * tol * smax * vector_norm(b);
    if residual > threshold {
        return Err(LinalgError::Inconsistent { residual: residual.to_f64(), threshold: threshold.to_f64() });
    }
    Ok(x)
}

/// Inverse of a square matrix; refuses when `sigma_min <= tol * sigma_max`.
pub fn invert<T: Real>(a: &ComplexMatrix<T>, tol: T) -> Result<ComplexMatrix<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let d = svd(a)?;
    let (smax, smin) = (d.sigma_max(), d.sigma_min());
    if smax.is_zero() || smin <= tol * smax {
        let ratio = if smax.is_zero() { 0.0 } else { (smin / smax).to_f64() };
        return Err(LinalgError::Singular { ratio });
    }
    let n = a.rows();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        d.singular_values
            .iter()
            .enumerate()
            .fold(Complex::zero(), |acc, (k, s)| acc + d.right[(i, k)] * d.left[(j, k)].conj() / *s)
    }))
}

/// 2-norm condition number.
pub fn condition_number<T: Real>(a: &ComplexMatrix<T>) -> Result<T, LinalgError> {
    let d = svd(a)?;
    Ok(d.sigma_max() / d.sigma_min())
}
