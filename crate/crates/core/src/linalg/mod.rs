//! Dense complex linear algebra: arithmetic, SVD-based rank decisions and
//! solves, and a general eigensolver, generic over `f64` and [`Quad`].

mod eigen;
mod matrix;
pub mod quad;
mod real;
mod svd;

pub use eigen::{eigenvalues, eigenvalues_extended, spectral_distance, MAX_EIGEN_DIM};
pub use matrix::{format_complex, CVector, ComplexMatrix};
pub use num_complex::Complex;
pub use quad::Quad;
pub use real::{cabs, cconvert, cnarrow, csqrt, Real};
pub use svd::{condition_number, invert, min_norm_solve, null_space, svd, vector_norm, Svd, DEFAULT_RANK_TOL};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("invalid shape {rows}x{cols} for {len} entries")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {n} exceeds the dense eigensolver limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("matrix is numerically singular (sigma_min/sigma_max = {ratio:.3e})")]
    Singular { ratio: f64 },
    #[error("inconsistent system: residual {residual:.3e} exceeds {threshold:.3e}")]
    Inconsistent { residual: f64, threshold: f64 },
    #[error("iteration failed to converge after {iterations} steps")]
    NoConvergence { iterations: usize },
}

/// Shorthand for a double-precision complex scalar.
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}
