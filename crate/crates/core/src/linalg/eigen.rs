//! Eigenvalues of a general complex matrix: balancing, Householder reduction
//! to upper Hessenberg form, then single-shift QR with Givens rotations.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::{CVector, ComplexMatrix};
use super::quad::Quad;
use super::real::{cabs, cabs1, cdiv, cnarrow, csqrt, Real};
use super::LinalgError;

pub const MAX_EIGEN_DIM: usize = 64;

/// Diagonal similarity by powers of two so row and column norms are
/// comparable. Exact in binary floating point.
fn balance<T: Real>(a: &mut ComplexMatrix<T>) {
    let n = a.rows();
    let radix = T::from_f64(2.0);
    let radix2 = radix * radix;
    for _ in 0..200 {
        let mut changed = false;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += cabs1(a[(j, i)]);
                    r += cabs1(a[(i, j)]);
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while c >= g {
                f /= radix;
                c /= radix2;
            }
            if (c + r) / f < T::from_f64(0.95) * s {
                changed = true;
                let inv = T::one() / f;
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] * inv;
                    a[(j, i)] = a[(j, i)] * f;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn hessenberg<T: Real>(a: &mut ComplexMatrix<T>) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: CVector<T> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail = x[1..].iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im);
        if tail.is_zero() {
            continue;
        }
        let norm = (tail + x[0].re * x[0].re + x[0].im * x[0].im).sqrt();
        let x0_abs = cabs(x[0]);
        let phase = if x0_abs.is_zero() { Complex::one() } else { x[0] / x0_abs };
        let mut v = x.clone();
        v[0] = v[0] + phase * norm;
        let vnorm_sq = v.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im);
        let tau = T::from_f64(2.0) / vnorm_sq;

        // Left: rows k+1.. of all columns.
        for j in 0..n {
            let mut s = Complex::zero();
            for (idx, vi) in v.iter().enumerate() {
                s = s + vi.conj() * a[(k + 1 + idx, j)];
            }
            let s = s * tau;
            for (idx, vi) in v.iter().enumerate() {
                a[(k + 1 + idx, j)] = a[(k + 1 + idx, j)] - *vi * s;
            }
        }
        // Right: columns k+1.. of all rows.
        for i in 0..n {
            let mut s = Complex::zero();
            for (idx, vi) in v.iter().enumerate() {
                s = s + a[(i, k + 1 + idx)] * *vi;
            }
            let s = s * tau;
            for (idx, vi) in v.iter().enumerate() {
                a[(i, k + 1 + idx)] = a[(i, k + 1 + idx)] - s * vi.conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex::zero();
        }
    }
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::from_f64(0.5);
    let t = (a - d) * half;
    let bc = b * c;
    let disc = csqrt(t * t + bc);
    let p = t + disc;
    let m = t - disc;
    let denom = if cabs(p) >= cabs(m) { p } else { m };
    if cabs(denom).is_zero() {
        d
    } else {
        d - cdiv(bc, denom)
    }
}

/// One explicit shifted QR step on the window `lo..=hi`.
fn qr_step<T: Real>(h: &mut ComplexMatrix<T>, lo: usize, hi: usize, mu: Complex<T>) {
    for i in lo..=hi {
        h[(i, i)] = h[(i, i)] - mu;
    }
    let mut rotations: Vec<(T, Complex<T>)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = cabs(a).hypot(cabs(b));
        let (c, s) = if r.is_zero() {
            (T::one(), Complex::zero())
        } else if cabs(a).is_zero() {
            (T::zero(), Complex::one())
        } else {
            let aa = cabs(a);
            let phase = Complex::new(a.re / aa, a.im / aa);
            (aa / r, phase * b.conj() / r)
        };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = y * c - s.conj() * x;
        }
        h[(k + 1, k)] = Complex::zero();
        rotations.push((c, s));
    }
    for (offset, (c, s)) in rotations.into_iter().enumerate() {
        let k = lo + offset;
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = y * c - x * s;
        }
    }
    for i in lo..=hi {
        h[(i, i)] = h[(i, i)] + mu;
    }
}

/// All `n` eigenvalues (with multiplicity) of a square matrix.
///
/// Deflation uses the neighbour test plus an absolute floor of
/// `eps * |a|_F`, so each returned value is an exact eigenvalue of a matrix
/// within a small multiple of `eps * |a|` of the input.
pub fn eigenvalues<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<Complex<T>>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > MAX_EIGEN_DIM {
        return Err(LinalgError::TooLarge { n, max: MAX_EIGEN_DIM });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);

    let eps = T::epsilon();
    let floor = eps * h.frobenius();
    let max_its = 30 * n.max(10);
    let mut eig = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            break;
        }
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = cabs1(h[(k, k - 1)]);
            let neighbours = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
            if sub <= eps * neighbours || sub <= floor {
                h[(k, k - 1)] = Complex::zero();
                lo = k;
                break;
            }
        }
        if lo == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if its > max_its {
            return Err(LinalgError::NoConvergence { iterations: total });
        }
        let mu = if its.is_multiple_of(10) {
            // Exceptional shift to break cycles. The direction rotates between
            // attempts so matrices with a circular spectrum cannot stall.
            let s = T::from_f64(0.75) * cabs1(h[(hi, hi - 1)]);
            let angle = 0.7 * (its / 10) as f64;
            h[(hi, hi)] + Complex::new(s * T::from_f64(angle.cos()), s * T::from_f64(angle.sin()))
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, mu);
    }
    eig.reverse();
    Ok(eig)
}

/// Double-precision eigenvalues computed through quad-double arithmetic.
///
/// The input is widened exactly, so the result is accurate to the
/// conditioning of the `f64` matrix itself rather than to `ulp^(1/N)`.
pub fn eigenvalues_extended(a: &ComplexMatrix<f64>) -> Result<Vec<Complex<f64>>, LinalgError> {
    let wide: ComplexMatrix<Quad> = a.convert();
    Ok(eigenvalues(&wide)?.into_iter().map(cnarrow).collect())
}

/// Smallest `d` such that the two multisets can be matched one-to-one with
/// every pair within `d`. Returns infinity on a length mismatch.
pub fn spectral_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let n = a.len();
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let mut candidates: Vec<f64> = dist.iter().flatten().copied().collect();
    candidates.sort_by(|x, y| x.total_cmp(y));
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(n, |i, j| dist[i][j] <= candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

fn perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    fn augment(
        i: usize,
        n: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..n {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, n, edge, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|i| {
        let mut seen = vec![false; n];
        augment(i, n, &edge, &mut seen, &mut owner)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd::condition_number;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(n: usize, vals: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            let k = (i * n + j) * 2;
            c(vals[k % vals.len()], vals[(k + 1) % vals.len()])
        })
    }

    fn det(a: &ComplexMatrix) -> Complex<f64> {
        // Gaussian elimination with partial pivoting.
        let n = a.rows();
        let mut m = a.clone();
        let mut d = c(1.0, 0.0);
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| m[(x, k)].norm().total_cmp(&m[(y, k)].norm())).unwrap();
            if p != k {
                for j in 0..n {
                    let t = m[(k, j)];
                    m[(k, j)] = m[(p, j)];
                    m[(p, j)] = t;
                }
                d = -d;
            }
            let piv = m[(k, k)];
            d *= piv;
            if piv.norm() == 0.0 {
                return c(0.0, 0.0);
            }
            for i in k + 1..n {
                let f = m[(i, k)] / piv;
                for j in k..n {
                    let t = m[(k, j)];
                    m[(i, j)] -= f * t;
                }
            }
        }
        d
    }

    #[test]
    fn diagonal_input() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 1.0), c(2.0, 0.0)]);
        let e = eigenvalues(&a).unwrap();
        assert!(spectral_distance(&e, &[c(1.0, 1.0), c(2.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn perturbed_jordan_block_fourth_roots() {
        let eps = 1e-4;
        let mut a: ComplexMatrix = ComplexMatrix::jordan_block(4);
        a[(3, 0)] = c(eps, 0.0);
        let e = eigenvalues(&a).unwrap();
        let want: Vec<_> =
            (1..=4).map(|m| Complex::from_polar(eps.powf(0.25), std::f64::consts::PI * m as f64 / 2.0)).collect();
        assert!(spectral_distance(&e, &want) < 1e-10);
    }

    #[test]
    fn cyclic_matrices_with_complex_corner() {
        for n in 2..=9 {
            for phase in [0.0, 0.4, 1.3, 2.9] {
                let v = Complex::from_polar(1e-6, phase);
                let mut a: ComplexMatrix = ComplexMatrix::jordan_block(n);
                a[(n - 1, 0)] = v;
                let r = v.norm().powf(1.0 / n as f64);
                let want: Vec<_> = (0..n)
                    .map(|m| Complex::from_polar(r, (phase + 2.0 * std::f64::consts::PI * m as f64) / n as f64))
                    .collect();
                let e = eigenvalues(&a).unwrap();
                assert!(spectral_distance(&e, &want) < 1e-10 * r.max(1e-3), "n={n} phase={phase}");
                let q = eigenvalues_extended(&a).unwrap_or_else(|e| panic!("n={n} phase={phase}: {e}"));
                assert!(spectral_distance(&q, &want) < 1e-14, "n={n} phase={phase}");
            }
        }
    }

    #[test]
    fn hermitian_susy_like_spectrum() {
        // N=4 graded chain below the exceptional point: omega0 = 0, gamma = 0.5, J = 1.
        let (g, j) = (0.5, 1.0);
        let s3 = 3f64.sqrt();
        let a = ComplexMatrix::new(
            4,
            4,
            vec![
                c(0.0, 3.0 * g),
                c(s3 * j, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(s3 * j, 0.0),
                c(0.0, g),
                c(2.0 * j, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(2.0 * j, 0.0),
                c(0.0, -g),
                c(s3 * j, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(s3 * j, 0.0),
                c(0.0, -3.0 * g),
            ],
        )
        .unwrap();
        let e = eigenvalues(&a).unwrap();
        let r = 0.75f64.sqrt();
        let want = [c(-3.0 * r, 0.0), c(-r, 0.0), c(r, 0.0), c(3.0 * r, 0.0)];
        assert!(spectral_distance(&e, &want) < 1e-10);
    }

    #[test]
    fn quad_resolves_nilpotent_noise() {
        // Exactly nilpotent after a unitary-free similarity: the Hessenberg
        // reduction introduces rounding, so f64 scatters near ulp^(1/4).
        let x = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(1.0, 0.0)
            } else if j == i + 1 {
                c(0.5, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let xinv = crate::linalg::svd::invert(&x, 1e-12).unwrap();
        let a = x.matmul(&ComplexMatrix::jordan_block(4)).unwrap().matmul(&xinv).unwrap();
        let e = eigenvalues_extended(&a).unwrap();
        // Residual reflects the f64 rounding of `a` itself, not the solver.
        assert!(e.iter().all(|z| z.norm() < 1e-3));
    }

    #[test]
    fn rejects_bad_input() {
        let a: ComplexMatrix = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eigenvalues(&a), Err(LinalgError::NotSquare { .. })));
        let big: ComplexMatrix = ComplexMatrix::identity(65);
        assert!(matches!(eigenvalues(&big), Err(LinalgError::TooLarge { .. })));
    }

    #[test]
    fn spectral_distance_is_a_bottleneck_matching() {
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(1.1, 0.0), c(0.05, 0.0)];
        assert!((spectral_distance(&a, &b) - 0.1).abs() < 1e-15);
        assert_eq!(spectral_distance(&a, &b[..1]), f64::INFINITY);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_and_determinant(n in 1usize..9, vals in prop::collection::vec(-2.0f64..2.0, 16..40)) {
            let a = random_matrix(n, &vals);
            let e = eigenvalues(&a).unwrap();
            prop_assert_eq!(e.len(), n);
            let sum: Complex<f64> = e.iter().sum();
            let norm = a.frobenius().max(1e-300);
            prop_assert!((sum - a.trace()).norm() <= 1e-9 * norm);
            let prod: Complex<f64> = e.iter().product();
            let d = det(&a);
            let kappa = condition_number(&a).unwrap_or(f64::INFINITY);
            if kappa < 1e8 {
                prop_assert!((prod - d).norm() <= 1e-8 * d.norm().max(1e-300));
            }
        }

        #[test]
        fn backward_error_small(n in 2usize..9, vals in prop::collection::vec(-2.0f64..2.0, 16..40)) {
            // Each eigenvalue makes (a - lambda I) numerically singular at the
            // level of the backward error bound.
            let a = random_matrix(n, &vals);
            let norm = a.frobenius();
            for lambda in eigenvalues(&a).unwrap() {
                let s = crate::linalg::svd::svd(&a.shift_diagonal(-lambda)).unwrap();
                prop_assert!(s.sigma_min() <= 1e-11 * norm);
            }
        }
    }
}
