//! Right and left Jordan chains of an exceptional point.
//!
//! The right chain is `u_0 .. u_{N-1}` with `(H - E0) u_0 = 0` and
//! `(H - E0) u_k = u_{k-1}`. The left frame is stored as `V = U^{-1}`, so
//! row `r` of `V` is the left vector `<v_{N-1-r}|` and the pairing
//! `<v_i|u_j> = delta_{i+j, N-1}` reads `V U = I`.

use num_complex::Complex;
use num_traits::Zero;

use crate::linalg::{
    invert, min_norm_solve, null_space, vector_norm, CVector, ComplexMatrix, LinalgError, C64, DEFAULT_RANK_TOL,
};

/// Default tolerance on chain residuals and biorthogonality.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JordanError {
    #[error("matrix is {rows}x{cols} but the chain order is {order}")]
    OrderMismatch { rows: usize, cols: usize, order: usize },
    #[error("not a simple EP chain: kernel of H - E0 has dimension {geometric}")]
    NotSimpleChain { geometric: usize },
    #[error("algebraic multiplicity < N or wrong E0: chain step {step} failed ({source})")]
    ChainStep { step: usize, source: LinalgError },
    #[error("chain residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Inaccurate { residual: f64, tol: f64 },
    #[error("cannot invert the right chain: {0}")]
    Inversion(LinalgError),
    #[error("invalid chain parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How the freedom `u_k -> u_k + t_1 u_{k-1} + ... + t_k u_0` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainGauge {
    /// Every `u_k` with `k >= 1` vanishes at the pivot row of `u_0`, the
    /// last row where `u_0` is not negligible. For tridiagonal arrays this
    /// is the triangular frame with zeros in the last `k` rows of `u_k`.
    #[default]
    PivotRow,
    /// Each `u_k` is the minimum-norm solution of its chain step.
    MinNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Relative singular-value cutoff for kernel and range decisions.
    pub rank_tol: f64,
    /// Acceptance bound on the residuals of the finished chain.
    pub chain_tol: f64,
    pub gauge: ChainGauge,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { rank_tol: DEFAULT_RANK_TOL, chain_tol: DEFAULT_CHAIN_TOL, gauge: ChainGauge::default() }
    }
}

/// Entries of `u_0` below this fraction of its peak cannot serve as pivot.
const PIVOT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain {
    order: usize,
    e0: C64,
    u: ComplexMatrix,
    v: ComplexMatrix,
}

impl JordanChain {
    /// Assembles a chain from explicit frames. Only shapes are checked; use
    /// [`verify_chain`] to test the chain identities.
    pub fn from_parts(e0: C64, u: ComplexMatrix, v: ComplexMatrix) -> Result<Self, JordanError> {
        let order = u.rows();
        for m in [&u, &v] {
            if m.rows() != order || m.cols() != order {
                return Err(JordanError::OrderMismatch { rows: m.rows(), cols: m.cols(), order });
            }
        }
        if !(e0.re.is_finite() && e0.im.is_finite()) {
            return Err(JordanError::InvalidParameter("E0 must be finite".into()));
        }
        Ok(Self { order, e0, u, v })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn e0(&self) -> C64 {
        self.e0
    }

    /// Right frame; column `k` is `u_k`.
    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    /// Left frame; row `r` is `<v_{N-1-r}|`.
    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    /// The right vector `u_k`.
    pub fn right(&self, k: usize) -> CVector {
        self.u.column(k)
    }

    /// The left vector `<v_i|` as a row.
    pub fn left(&self, i: usize) -> CVector {
        self.v.row(self.order - 1 - i).to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub right_residuals: Vec<f64>,
    pub left_residuals: Vec<f64>,
    pub biorthogonality_error: f64,
    pub geometric_multiplicity: usize,
}

impl ChainReport {
    pub fn max_residual(&self) -> f64 {
        self.right_residuals.iter().chain(&self.left_residuals).copied().fold(self.biorthogonality_error, f64::max)
    }
}

/// Builds the chain of `h` at `e0`, assuming a single Jordan block of size `order`.
pub fn build_chain(h: &ComplexMatrix, e0: C64, order: usize, opts: ChainOptions) -> Result<JordanChain, JordanError> {
    if !h.is_square() || h.rows() != order || order == 0 {
        return Err(JordanError::OrderMismatch { rows: h.rows(), cols: h.cols(), order });
    }
    if !(opts.rank_tol > 0.0 && opts.chain_tol > 0.0) {
        return Err(JordanError::InvalidParameter("tolerances must be positive".into()));
    }
    let shifted = h.shift_diagonal(-e0);
    let kernel = null_space(&shifted, opts.rank_tol)?;
    if kernel.len() != 1 {
        return Err(JordanError::NotSimpleChain { geometric: kernel.len() });
    }
    let u0 = fix_phase(kernel.into_iter().next().unwrap());
    let peak = u0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = u0.iter().rposition(|z| z.norm() >= PIVOT_FLOOR * peak).unwrap_or(0);
    let mut columns = vec![u0];
    for step in 1..order {
        let prev = &columns[step - 1];
        let mut next =
            min_norm_solve(&shifted, prev, opts.rank_tol).map_err(|source| JordanError::ChainStep { step, source })?;
        if opts.gauge == ChainGauge::PivotRow {
            let c = next[pivot] / columns[0][pivot];
            for (x, a) in next.iter_mut().zip(&columns[0]) {
                *x -= c * a;
            }
            next[pivot] = C64::zero();
        }
        columns.push(next);
    }
    let u = ComplexMatrix::from_columns(&columns)?;
    let v = invert(&u, opts.rank_tol).map_err(JordanError::Inversion)?;
    let chain = JordanChain { order, e0, u, v };

    let report = verify_chain(&chain, h)?;
    let scale = h.max_abs().max(1.0) * chain.u.max_abs().max(1.0) * chain.v.max_abs().max(1.0);
    let tol = opts.chain_tol * scale;
    if report.max_residual() > tol {
        return Err(JordanError::Inaccurate { residual: report.max_residual(), tol });
    }
    Ok(chain)
}

/// Unit norm, with the largest component rotated onto the positive real axis.
/// Near-ties are resolved towards the lowest index so the choice is stable.
fn fix_phase(mut x: CVector) -> CVector {
    let norm = vector_norm(&x);
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = x.iter().position(|z| z.norm() >= peak * (1.0 - 1e-9)).unwrap_or(0);
    let p = x[pivot];
    let rot = if p.is_zero() { Complex::new(1.0, 0.0) } else { p.conj() / p.norm() };
    for z in &mut x {
        *z = *z * rot / norm;
    }
    x[pivot].im = 0.0;
    x
}

/// Residuals of the chain identities of `chain` with respect to `h`.
pub fn verify_chain(chain: &JordanChain, h: &ComplexMatrix) -> Result<ChainReport, JordanError> {
    let n = chain.order;
    if h.rows() != n || h.cols() != n {
        return Err(JordanError::OrderMismatch { rows: h.rows(), cols: h.cols(), order: n });
    }
    let shifted = h.shift_diagonal(-chain.e0);
    let au = shifted.matmul(&chain.u)?;
    let va = chain.v.matmul(&shifted)?;
    let zero = vec![C64::zero(); n];

    let right_residuals = (0..n)
        .map(|k| {
            let prev = if k == 0 { zero.clone() } else { chain.u.column(k - 1) };
            let d: CVector = au.column(k).iter().zip(&prev).map(|(a, b)| a - b).collect();
            vector_norm(&d)
        })
        .collect();
    // Row r of V carries <v_{n-1-r}|, so <v_i|(H - E0) = <v_{i-1}| means
    // row r of V(H - E0) equals row r + 1 of V.
    let left_residuals = (0..n)
        .map(|i| {
            let r = n - 1 - i;
            let prev: &[C64] = if i == 0 { &zero } else { chain.v.row(r + 1) };
            let d: CVector = va.row(r).iter().zip(prev).map(|(a, b)| a - b).collect();
            vector_norm(&d)
        })
        .collect();
    let vu = chain.v.matmul(&chain.u)?;
    let biorthogonality_error = vu.max_abs_diff(&ComplexMatrix::identity(n));
    let geometric_multiplicity = null_space(&shifted, DEFAULT_RANK_TOL)?.len();
    Ok(ChainReport { right_residuals, left_residuals, biorthogonality_error, geometric_multiplicity })
}

/// The closed-form chain of the four-site SUSY array at its EP (`gamma = J`).
pub fn reference_chain_susy4(j: f64, omega0: f64) -> Result<JordanChain, JordanError> {
    if j == 0.0 || !j.is_finite() || !omega0.is_finite() {
        return Err(JordanError::InvalidParameter(format!("coupling J must be finite and nonzero, got {j}")));
    }
    let s3 = 3f64.sqrt();
    let c = |re: f64, im: f64| C64::new(re, im);
    let (j2, j3) = (j * j, j * j * j);
    let u = vec![
        c(0.0, -1.0),
        c(-1.0 / j, 0.0),
        c(0.0, 1.0 / (2.0 * j2)),
        c(1.0 / (6.0 * j3), 0.0),
        c(-s3, 0.0),
        c(0.0, 2.0 / (s3 * j)),
        c(1.0 / (2.0 * s3 * j2), 0.0),
        c(0.0, 0.0),
        c(0.0, s3),
        c(1.0 / (s3 * j), 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    ];
    let v = vec![
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(s3 * j, 0.0),
        c(0.0, -3.0 * j),
        c(0.0, 0.0),
        c(2.0 * s3 * j2, 0.0),
        c(0.0, -4.0 * s3 * j2),
        c(-6.0 * j2, 0.0),
        c(6.0 * j3, 0.0),
        c(0.0, -6.0 * s3 * j3),
        c(-6.0 * s3 * j3, 0.0),
        c(0.0, 6.0 * j3),
    ];
    JordanChain::from_parts(c(omega0, 0.0), ComplexMatrix::new(4, 4, u)?, ComplexMatrix::new(4, 4, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn susy4(j: f64, omega0: f64) -> ComplexMatrix {
        let s3 = 3f64.sqrt();
        let d = [3.0, 1.0, -1.0, -3.0];
        let off = [s3, 2.0, s3];
        ComplexMatrix::from_fn(4, 4, |r, c| {
            if r == c {
                c64(omega0, d[r] * j)
            } else if r + 1 == c {
                c64(off[r] * j, 0.0)
            } else if c + 1 == r {
                c64(off[c] * j, 0.0)
            } else {
                C64::zero()
            }
        })
    }

    #[test]
    fn jordan_block_is_its_own_chain() {
        for n in 2..=8 {
            let e0 = c64(0.3, -1.2);
            let h = ComplexMatrix::jordan_block(n).shift_diagonal(e0);
            let chain = build_chain(&h, e0, n, ChainOptions::default()).unwrap();
            assert!(chain.u().max_abs_diff(&ComplexMatrix::identity(n)) < 1e-14, "n={n}");
            assert!(chain.v().max_abs_diff(&ComplexMatrix::identity(n)) < 1e-14);
            let rep = verify_chain(&chain, &h).unwrap();
            assert_eq!(rep.max_residual(), 0.0);
            assert_eq!(rep.geometric_multiplicity, 1);
        }
    }

    #[test]
    fn susy_chain_brings_h_to_jordan_form() {
        let h = susy4(1.0, 0.0);
        let chain = build_chain(&h, C64::zero(), 4, ChainOptions::default()).unwrap();
        let rep = verify_chain(&chain, &h).unwrap();
        assert!(rep.right_residuals.iter().all(|r| *r < 1e-9), "{rep:?}");
        let vhu = chain.v().matmul(&h).unwrap().matmul(chain.u()).unwrap();
        assert!(vhu.max_abs_diff(&ComplexMatrix::jordan_block(4)) < 1e-8);

        let opts = ChainOptions { gauge: ChainGauge::MinNorm, ..ChainOptions::default() };
        let min_norm = build_chain(&h, C64::zero(), 4, opts).unwrap();
        assert!(verify_chain(&min_norm, &h).unwrap().max_residual() < 1e-9);
        assert!(min_norm.u().max_abs_diff(chain.u()) > 1e-3);
    }

    #[test]
    fn pivot_gauge_matches_closed_form_up_to_scale() {
        let h = susy4(1.0, 0.0);
        let chain = build_chain(&h, C64::zero(), 4, ChainOptions::default()).unwrap();
        let reference = reference_chain_susy4(1.0, 0.0).unwrap();
        // Both frames have u_0 with unit pivot after rescaling by u_0[3].
        let s = chain.u()[(3, 0)];
        let rescaled = chain.u().scale(s.inv());
        assert!(rescaled.max_abs_diff(reference.u()) < 1e-12, "{rescaled:?}");
    }

    #[test]
    fn diagonalizable_matrix_has_no_chain() {
        let h = ComplexMatrix::from_diagonal(&[c64(1.0, 0.0), c64(2.0, 0.0)]);
        let err = build_chain(&h, c64(1.0, 0.0), 2, ChainOptions::default()).unwrap_err();
        assert!(matches!(err, JordanError::ChainStep { step: 1, .. }), "{err}");
        assert!(err.to_string().contains("algebraic multiplicity"));
    }

    #[test]
    fn wrong_energy_and_repeated_kernel_are_rejected() {
        let h = ComplexMatrix::jordan_block(3);
        let err = build_chain(&h, c64(0.5, 0.0), 3, ChainOptions::default()).unwrap_err();
        assert_eq!(err, JordanError::NotSimpleChain { geometric: 0 });
        let z = ComplexMatrix::zeros(2, 2);
        let err = build_chain(&z, C64::zero(), 2, ChainOptions::default()).unwrap_err();
        assert_eq!(err, JordanError::NotSimpleChain { geometric: 2 });
        assert!(matches!(
            build_chain(&h, C64::zero(), 4, ChainOptions::default()),
            Err(JordanError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn reference_chain_entries_and_residuals() {
        let chain = reference_chain_susy4(1.0, 0.0).unwrap();
        assert_eq!(chain.u()[(0, 0)], c64(0.0, -1.0));
        assert_eq!(chain.v()[(3, 0)], c64(6.0, 0.0));
        let rep = verify_chain(&chain, &susy4(1.0, 0.0)).unwrap();
        assert!(rep.max_residual() < 1e-12, "{rep:?}");

        let two = reference_chain_susy4(2.0, 0.7).unwrap();
        assert_eq!(two.v()[(3, 0)], c64(48.0, 0.0));
        let rep = verify_chain(&two, &susy4(2.0, 0.7)).unwrap();
        assert!(rep.max_residual() < 1e-12, "{rep:?}");

        assert!(reference_chain_susy4(0.0, 0.0).is_err());
    }

    #[test]
    fn offset_energy_shows_in_first_residual() {
        let chain = reference_chain_susy4(1.0, 0.0).unwrap();
        let shifted = JordanChain::from_parts(c64(0.1, 0.0), chain.u().clone(), chain.v().clone()).unwrap();
        let rep = verify_chain(&shifted, &susy4(1.0, 0.0)).unwrap();
        let expected = 0.1 * vector_norm(&chain.right(0));
        assert!((rep.right_residuals[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn left_vectors_follow_row_convention() {
        let chain = reference_chain_susy4(1.0, 0.0).unwrap();
        assert_eq!(chain.left(0), chain.v().row(3).to_vec());
        assert_eq!(chain.left(3), vec![C64::zero(), C64::zero(), C64::zero(), c64(1.0, 0.0)]);
    }
}
