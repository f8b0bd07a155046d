//! Projection of a perturbation onto a Jordan chain and the analytic
//! splitting laws that follow from the projected pattern.
//!
//! The projected matrix `M = V H1 U` is indexed so that entry `(r, c)` is
//! `H1^{p,q} = <v_p|H1|u_q>` with `p = N-1-r`, `q = c`. Its antidiagonal
//! index `j = p + q = N-1-r+c` is what controls the exponent: entries with
//! `j < N` lie on or below the main diagonal.

use std::f64::consts::PI;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::jordan::JordanChain;
use crate::linalg::{eigenvalues_extended, svd, vector_norm, CVector, ComplexMatrix, LinalgError, C64};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error("perturbation is {rows}x{cols} but the chain order is {order}")]
    DimensionMismatch { rows: usize, cols: usize, order: usize },
    #[error("epsilon must be finite, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPerturbation {
    m: ComplexMatrix,
}

impl ProjectedPerturbation {
    /// Wraps a matrix that is already in the projected layout.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self, PredictError> {
        if !m.is_square() {
            return Err(PredictError::DimensionMismatch { rows: m.rows(), cols: m.cols(), order: m.rows() });
        }
        Ok(Self { m })
    }

    pub fn order(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// `H1^{p,q}`.
    pub fn element(&self, p: usize, q: usize) -> C64 {
        self.m[(self.order() - 1 - p, q)]
    }

    /// `sum_{k=0}^{j} H1^{j-k,k}`.
    pub fn antidiagonal_sum(&self, j: usize) -> C64 {
        let n = self.order();
        (0..=j).filter(|&k| j - k < n && k < n).map(|k| self.element(j - k, k)).sum()
    }
}

/// `V H1 U` for the given chain.
pub fn project(chain: &JordanChain, h1: &ComplexMatrix) -> Result<ProjectedPerturbation, PredictError> {
    let n = chain.order();
    if h1.rows() != n || h1.cols() != n {
        return Err(PredictError::DimensionMismatch { rows: h1.rows(), cols: h1.cols(), order: n });
    }
    let m = chain.v().matmul(h1)?.matmul(chain.u())?;
    Ok(ProjectedPerturbation { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Nothing at `p + q < N`.
    NoSplit,
    SingleElement {
        p: usize,
        q: usize,
    },
    /// Every nonzero entry on the main diagonal (`p + q = N - 1`).
    Diagonal,
    /// Every nonzero entry on one antidiagonal `j < N - 1`.
    SingleLine {
        j: usize,
    },
    Mixed {
        j_min: usize,
    },
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::NoSplit => write!(f, "Case1"),
            CaseTag::SingleElement { p, q } => write!(f, "Case2(p={p}, q={q})"),
            CaseTag::Diagonal => write!(f, "Case3"),
            CaseTag::SingleLine { j } => write!(f, "Case4(j={j})"),
            CaseTag::Mixed { j_min } => write!(f, "Mixed(j_min={j_min})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseClass {
    pub tag: CaseTag,
    pub zero_tol: f64,
}

/// Entries with magnitude above `zero_tol * |M|_max`, as `(row, col)`.
fn support(p: &ProjectedPerturbation, zero_tol: f64) -> Vec<(usize, usize)> {
    let m = p.matrix();
    let cutoff = zero_tol * m.max_abs();
    let n = p.order();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            if z.norm() > cutoff && !z.is_zero() {
                out.push((r, c));
            }
        }
    }
    out
}

/// Sorts the projected pattern into the splitting cases.
///
/// Cases 2 to 4 require the whole support of `M` to match their pattern;
/// any extra entry (including ones above the diagonal) makes it `Mixed`.
pub fn classify(p: &ProjectedPerturbation, zero_tol: f64) -> CaseClass {
    let n = p.order();
    let nz = support(p, zero_tol);
    let anti = |(r, c): (usize, usize)| n - 1 - r + c;
    let tag = if nz.iter().all(|&rc| anti(rc) >= n) {
        CaseTag::NoSplit
    } else if nz.len() == 1 {
        let (r, c) = nz[0];
        CaseTag::SingleElement { p: n - 1 - r, q: c }
    } else if nz.iter().all(|&(r, c)| r == c) {
        CaseTag::Diagonal
    } else {
        let j_min = nz.iter().map(|&rc| anti(rc)).min().unwrap();
        if j_min < n - 1 && nz.iter().all(|&rc| anti(rc) == j_min) {
            CaseTag::SingleLine { j: j_min }
        } else {
            CaseTag::Mixed { j_min }
        }
    };
    CaseClass { tag, zero_tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Conjecture,
    NumericOnly,
    NoSplit,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Exact => "Exact",
            Confidence::Conjecture => "Conjecture",
            Confidence::NumericOnly => "NumericOnly",
            Confidence::NoSplit => "NoSplit",
        })
    }
}

/// What a diagonal perturbation does to the EP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpVerdict {
    /// All diagonal entries equal: a uniform shift.
    Preserved,
    PartiallySplit,
    /// All diagonal entries distinct.
    FullySplit,
}

impl fmt::Display for EpVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpVerdict::Preserved => "EP preserved",
            EpVerdict::PartiallySplit => "EP partially split",
            EpVerdict::FullySplit => "EP fully split",
        })
    }
}

/// The exponent `1/den` (always of unit numerator here).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub fn reciprocal(den: usize) -> Self {
        Self { num: 1, den: den as u32 }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Always `num/den`, e.g. `1/1`.
    pub fn ratio_string(self) -> String {
        format!("{}/{}", self.num, self.den)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BranchLaw {
    None,
    /// `k` roots of `lambda^k = eps * c`, padded with zeros to `n`.
    Root {
        k: usize,
        c: C64,
        n: usize,
    },
    /// `lambda_m = eps * d_m`.
    Linear(CVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingPrediction {
    pub case: CaseClass,
    pub order: usize,
    pub alpha: Option<Exponent>,
    /// Number of branches that leave the EP.
    pub branch_count: usize,
    pub coefficient: Option<C64>,
    pub confidence: Confidence,
    pub verdict: Option<EpVerdict>,
    law: BranchLaw,
}

impl SplittingPrediction {
    pub fn has_branches(&self) -> bool {
        self.law != BranchLaw::None
    }

    /// Predicted eigenvalue shifts `lambda_m(eps)` relative to `E0`.
    ///
    /// Exact predictions return all `N` shifts, with the non-splitting ones
    /// as explicit zeros. Other confidences return an empty list.
    pub fn branches(&self, eps: f64) -> Vec<C64> {
        match &self.law {
            BranchLaw::None => Vec::new(),
            BranchLaw::Root { k, c, n } => {
                let mut out = root_branches(eps, *c, *k);
                out.resize(*n, C64::zero());
                out
            }
            BranchLaw::Linear(d) => d.iter().map(|z| z * eps).collect(),
        }
    }

    /// Largest predicted `|lambda_m(eps)|`, or `None` without branches.
    pub fn splitting_at(&self, eps: f64) -> Option<f64> {
        if !self.has_branches() {
            return None;
        }
        Some(self.branches(eps).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn to_json(&self, eps: Option<f64>) -> Value {
        let pair = |z: C64| json!([z.re, z.im]);
        let case = match self.case.tag {
            CaseTag::NoSplit => json!({ "tag": "Case1" }),
            CaseTag::SingleElement { p, q } => json!({ "tag": "Case2", "p": p, "q": q }),
            CaseTag::Diagonal => json!({
                "tag": "Case3",
                "verdict": self.verdict.map(|v| format!("{v:?}")),
            }),
            CaseTag::SingleLine { j } => json!({ "tag": "Case4", "j": j }),
            CaseTag::Mixed { j_min } => json!({ "tag": "Mixed", "j_min": j_min }),
        };
        let mut obj = json!({
            "alpha_num": self.alpha.map(|a| a.num),
            "alpha_den": self.alpha.map(|a| a.den),
            "coefficient": self.coefficient.map(pair),
            "confidence": self.confidence.to_string(),
            "case": case,
            "zero_tol": self.case.zero_tol,
        });
        if let (Some(e), true) = (eps, self.has_branches()) {
            let values: Vec<Value> = self.branches(e).into_iter().map(pair).collect();
            obj["branches_at"] = json!({ "epsilon": e, "values": values });
        }
        obj
    }
}

/// The `k` values `eps^(1/k) c^(1/k) exp(2 pi i m / k)`, `m = 1..k`, with the
/// principal `k`-th root of `c`.
pub fn root_branches(eps: f64, c: C64, k: usize) -> Vec<C64> {
    let kf = k as f64;
    let base = C64::from_polar((eps.abs() * c.norm()).powf(1.0 / kf), c.arg() / kf);
    let base = if eps < 0.0 { base * C64::from_polar(1.0, PI / kf) } else { base };
    (1..=k).map(|m| base * C64::from_polar(1.0, 2.0 * PI * m as f64 / kf)).collect()
}

pub fn predict(p: &ProjectedPerturbation, cls: &CaseClass) -> SplittingPrediction {
    let n = p.order();
    let scale = p.matrix().max_abs();
    let cutoff = cls.zero_tol * scale;
    let mut out = SplittingPrediction {
        case: *cls,
        order: n,
        alpha: None,
        branch_count: 0,
        coefficient: None,
        confidence: Confidence::NoSplit,
        verdict: None,
        law: BranchLaw::None,
    };
    let half = (n - 1) / 2;
    match cls.tag {
        CaseTag::NoSplit => {}
        CaseTag::SingleElement { p: pi, q } => {
            let k = n - pi - q;
            let c = p.element(pi, q);
            out.alpha = Some(Exponent::reciprocal(k));
            out.branch_count = k;
            out.coefficient = Some(c);
            out.confidence = Confidence::Exact;
            out.law = BranchLaw::Root { k, c, n };
        }
        CaseTag::Diagonal => {
            let d = p.matrix().diagonal();
            out.alpha = Some(Exponent::reciprocal(1));
            out.branch_count = n;
            out.confidence = Confidence::Exact;
            out.verdict = Some(diagonal_verdict(&d, cutoff));
            out.law = BranchLaw::Linear(d);
        }
        CaseTag::SingleLine { j } if j <= half => {
            let c = p.antidiagonal_sum(j);
            out.coefficient = Some(c);
            if c.norm() > cutoff {
                let k = n - j;
                out.alpha = Some(Exponent::reciprocal(k));
                out.branch_count = k;
                out.confidence = Confidence::Exact;
                out.law = BranchLaw::Root { k, c, n };
            } else {
                out.confidence = Confidence::NumericOnly;
            }
        }
        CaseTag::SingleLine { j } => {
            out.alpha = Some(Exponent::reciprocal(n - j));
            out.branch_count = n - j;
            out.confidence = Confidence::Conjecture;
        }
        CaseTag::Mixed { j_min } => {
            let c = p.antidiagonal_sum(j_min);
            if j_min <= half && c.norm() > cutoff {
                out.alpha = Some(Exponent::reciprocal(n - j_min));
                out.branch_count = n - j_min;
                out.coefficient = Some(c);
                out.confidence = Confidence::Conjecture;
            } else {
                out.confidence = Confidence::NumericOnly;
            }
        }
    }
    out
}

/// Groups equal diagonal entries (within `tol`) and names the outcome.
pub fn diagonal_verdict(d: &[C64], tol: f64) -> EpVerdict {
    let groups = cluster(d, tol).len();
    if groups == 1 {
        EpVerdict::Preserved
    } else if groups == d.len() {
        EpVerdict::FullySplit
    } else {
        EpVerdict::PartiallySplit
    }
}

/// Single-linkage clusters of points closer than `tol`, as index lists.
fn cluster(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            if (values[a] - values[b]).norm() <= tol {
                let (ra, rb) = (root(&mut label, a), root(&mut label, b));
                label[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = root(&mut label, i);
        match seen[r] {
            Some(g) => groups[g].push(i),
            None => {
                seen[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// `J_N + eps M`.
pub fn reduced_matrix(p: &ProjectedPerturbation, eps: f64) -> Result<ComplexMatrix, PredictError> {
    if !eps.is_finite() {
        return Err(PredictError::BadEpsilon(eps));
    }
    let n = p.order();
    let mut r = p.matrix().scale_real(eps);
    for i in 0..n - 1 {
        r[(i, i + 1)] += C64::new(1.0, 0.0);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEigenpair {
    pub lambda: C64,
    pub multiplicity: usize,
    /// Expansion coefficients `(1, s_1, ..., s_{N-1})`; `None` when the
    /// eigenvector has a vanishing first component.
    pub s: Option<CVector>,
}

/// Eigenvalues closer than this (relative to `max(1, |R|_max)`) are merged.
/// An exactly defective `f64` matrix of order 8 still splits by about
/// `(1e-63)^(1/8)` in quad-double, so this sits above that.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Eigenpairs of the reduced matrix with eigenvectors scaled to `S[0] = 1`.
pub fn reduced_eigenpairs(p: &ProjectedPerturbation, eps: f64) -> Result<Vec<ReducedEigenpair>, PredictError> {
    let r = reduced_matrix(p, eps)?;
    let n = r.rows();
    let scale = r.max_abs().max(1.0);
    let eigs = eigenvalues_extended(&r)?;
    let mut out = Vec::new();
    for group in cluster(&eigs, CLUSTER_TOL * scale) {
        let lambda = group.iter().map(|&i| eigs[i]).sum::<C64>() / group.len() as f64;
        let shifted = r.shift_diagonal(-lambda);
        let d = svd(&shifted)?;
        let cutoff = 1e-8 * d.sigma_max().max(scale);
        let mut kernel: Vec<CVector> = d
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= cutoff)
            .map(|(k, _)| d.right.column(k))
            .collect();
        if kernel.is_empty() {
            kernel.push(d.right.column(n - 1));
        }
        // Component of e_0 inside the kernel: the kernel vector with the
        // largest possible first entry.
        let mut s: CVector = vec![C64::zero(); n];
        for k in &kernel {
            let w = k[0].conj();
            for (si, ki) in s.iter_mut().zip(k) {
                *si += ki * w;
            }
        }
        let first = s[0];
        let s = if first.is_zero() || first.norm() < 1e-12 * vector_norm(&s) {
            None
        } else {
            let mut v: CVector = s.iter().map(|z| z / first).collect();
            v[0] = C64::new(1.0, 0.0);
            Some(v)
        };
        out.push(ReducedEigenpair { lambda, multiplicity: group.len(), s });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::reference_chain_susy4;
    use crate::linalg::{c64, spectral_distance};

    fn single(n: usize, p: usize, q: usize, v: C64) -> ProjectedPerturbation {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(n - 1 - p, q)] = v;
        ProjectedPerturbation::from_matrix(m).unwrap()
    }

    fn cls(p: &ProjectedPerturbation) -> CaseTag {
        classify(p, DEFAULT_ZERO_TOL).tag
    }

    #[test]
    fn classification_examples() {
        assert_eq!(cls(&single(4, 0, 0, c64(1.0, 0.0))), CaseTag::SingleElement { p: 0, q: 0 });
        let diag = ProjectedPerturbation::from_matrix(ComplexMatrix::from_diagonal(&[
            c64(0.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(0.0, 0.0),
        ]))
        .unwrap();
        assert_eq!(cls(&diag), CaseTag::Diagonal);
        let upper = ProjectedPerturbation::from_matrix(ComplexMatrix::from_fn(4, 4, |r, c| {
            if c > r {
                c64(1.0 + r as f64, c as f64)
            } else {
                C64::zero()
            }
        }))
        .unwrap();
        assert_eq!(cls(&upper), CaseTag::NoSplit);
        let zero = ProjectedPerturbation::from_matrix(ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(cls(&zero), CaseTag::NoSplit);
    }

    #[test]
    fn single_diagonal_entry_is_case_two() {
        let p = single(4, 1, 2, c64(2.0, 0.0));
        assert_eq!(cls(&p), CaseTag::SingleElement { p: 1, q: 2 });
    }

    #[test]
    fn extra_entries_make_the_pattern_mixed() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(2, 0)] = c64(1.0, 0.0);
        m[(3, 1)] = c64(1.0, 0.0);
        let line = ProjectedPerturbation::from_matrix(m.clone()).unwrap();
        assert_eq!(cls(&line), CaseTag::SingleLine { j: 1 });
        m[(0, 3)] = c64(1.0, 0.0);
        let mixed = ProjectedPerturbation::from_matrix(m.clone()).unwrap();
        assert_eq!(cls(&mixed), CaseTag::Mixed { j_min: 1 });
        m[(3, 0)] = c64(1e-12, 0.0);
        let dusty = ProjectedPerturbation::from_matrix(m).unwrap();
        assert_eq!(cls(&dusty), CaseTag::Mixed { j_min: 1 });
    }

    #[test]
    fn case_two_branches() {
        let p = single(4, 0, 0, c64(1.0, 0.0));
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        assert_eq!(pred.alpha, Some(Exponent { num: 1, den: 4 }));
        assert_eq!(pred.confidence, Confidence::Exact);
        let b = pred.branches(1e-4);
        for (m, z) in b.iter().enumerate() {
            let expect = C64::from_polar(0.1, PI * (m + 1) as f64 / 2.0);
            assert!((z - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn case_two_pads_with_zero_branches() {
        let p = single(5, 1, 2, c64(0.0, 3.0));
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        let b = pred.branches(1e-6);
        assert_eq!(b.len(), 5);
        assert_eq!(pred.branch_count, 2);
        assert_eq!(b.iter().filter(|z| z.is_zero()).count(), 3);
        let eigs = eigenvalues_extended(&reduced_matrix(&p, 1e-6).unwrap()).unwrap();
        assert!(spectral_distance(&eigs, &b) < 1e-12);
    }

    #[test]
    fn case_four_example() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(2, 0)] = c64(0.5, 0.0);
        m[(3, 1)] = c64(0.5, 0.0);
        let p = ProjectedPerturbation::from_matrix(m).unwrap();
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        assert_eq!(pred.alpha.unwrap().to_string(), "1/3");
        assert_eq!(pred.coefficient, Some(c64(1.0, 0.0)));
        assert!((pred.splitting_at(1e-3).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cancelling_line_is_numeric_only() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(2, 0)] = c64(0.5, 0.0);
        m[(3, 1)] = c64(-0.5, 0.0);
        let p = ProjectedPerturbation::from_matrix(m).unwrap();
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        assert_eq!(pred.confidence, Confidence::NumericOnly);
        assert!(pred.branches(1e-3).is_empty());
    }

    #[test]
    fn upper_line_is_a_conjecture() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(1, 0)] = c64(1.0, 0.0);
        m[(2, 1)] = c64(1.0, 0.0);
        m[(3, 2)] = c64(1.0, 0.0);
        let p = ProjectedPerturbation::from_matrix(m).unwrap();
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        assert_eq!(pred.case.tag, CaseTag::SingleLine { j: 2 });
        assert_eq!(pred.confidence, Confidence::Conjecture);
        assert_eq!(pred.alpha, Some(Exponent::reciprocal(2)));
        assert!(pred.coefficient.is_none());
    }

    #[test]
    fn case_three_verdicts() {
        let d = |v: &[f64]| {
            let p = ProjectedPerturbation::from_matrix(ComplexMatrix::from_diagonal(
                &v.iter().map(|x| c64(*x, 0.0)).collect::<Vec<_>>(),
            ))
            .unwrap();
            predict(&p, &classify(&p, DEFAULT_ZERO_TOL))
        };
        let partial = d(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(partial.verdict, Some(EpVerdict::PartiallySplit));
        assert_eq!(partial.branches(1e-3), vec![c64(0.0, 0.0), c64(1e-3, 0.0), c64(1e-3, 0.0), c64(0.0, 0.0)]);
        assert_eq!(partial.alpha.unwrap().to_string(), "1");
        assert_eq!(d(&[2.0, 2.0, 2.0]).verdict, Some(EpVerdict::Preserved));
        assert_eq!(d(&[1.0, 2.0, 3.0]).verdict, Some(EpVerdict::FullySplit));
    }

    #[test]
    fn golden_projections_from_reference_chain() {
        let chain = reference_chain_susy4(1.0, 0.0).unwrap();
        let mut h1 = ComplexMatrix::zeros(4, 4);
        h1[(0, 3)] = c64(1.0 / 6.0, 0.0);
        let m = project(&chain, &h1).unwrap();
        let mut expect = ComplexMatrix::zeros(4, 4);
        expect[(3, 0)] = c64(1.0, 0.0);
        assert!(m.matrix().max_abs_diff(&expect) < 1e-14);
        assert!(project(&chain, &ComplexMatrix::zeros(4, 4)).unwrap().matrix().max_abs() == 0.0);
        assert!(project(&chain, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn eigenvectors_of_case_two_are_powers() {
        let p = single(4, 0, 0, c64(1.0, 0.0));
        let pairs = reduced_eigenpairs(&p, 1e-4).unwrap();
        assert_eq!(pairs.len(), 4);
        for pair in pairs {
            let s = pair.s.unwrap();
            for (i, si) in s.iter().enumerate() {
                assert!((si - pair.lambda.powi(i as i32)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn nilpotent_reduced_matrix_has_one_cluster() {
        let m = ComplexMatrix::from_fn(5, 5, |r, c| if c > r { c64(0.3, -0.2 * c as f64) } else { C64::zero() });
        let p = ProjectedPerturbation::from_matrix(m).unwrap();
        let pairs = reduced_eigenpairs(&p, 1e-2).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].multiplicity, 5);
        assert!(pairs[0].lambda.norm() < 1e-12);
    }

    #[test]
    fn prediction_json_shape() {
        let p = single(4, 0, 0, c64(1.0, 0.0));
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        let v = pred.to_json(Some(1e-4));
        assert_eq!(v["alpha_num"], 1);
        assert_eq!(v["alpha_den"], 4);
        assert_eq!(v["case"]["tag"], "Case2");
        assert_eq!(v["branches_at"]["values"].as_array().unwrap().len(), 4);
    }
}
