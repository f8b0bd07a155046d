//! Numerical splitting sweeps, exponent fits, the conjecture harness and
//! the four-site benchmark dataset.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::jordan::{reference_chain_susy4, JordanError};
use crate::linalg::{cnarrow, eigenvalues, ComplexMatrix, LinalgError, Quad, Real, C64};
use crate::models::{format_f64, susy_hamiltonian, susy_perturbations, SusyParams};
use crate::plot::{render_loglog, PlotSeries};
use crate::predictor::{
    classify, predict, project, Confidence, Exponent, PredictError, SplittingPrediction, DEFAULT_ZERO_TOL,
};

/// Rows below `NOISE_FLOOR_REL * |H|_max` are excluded from fits.
pub const NOISE_FLOOR_REL: f64 = 1e-9;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep grid: {0}")]
    Grid(String),
    #[error("dimension mismatch: H is {h:?}, H1 is {h1:?}")]
    Dimension { h: (usize, usize), h1: (usize, usize) },
    #[error("exponent fit needs at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("exponent fit has degenerate abscissae")]
    DegenerateAbscissae,
    #[error("conjecture check needs (N-1)/2 < j < N-1, got N = {n}, j = {j}")]
    ConjectureRange { n: usize, j: usize },
    #[error("trial count must be positive")]
    NoTrials,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Chain(#[from] JordanError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eps_min: 1e-8, eps_max: 1e-2, points: 25 }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.eps_min.is_finite() && self.eps_max.is_finite() && self.eps_min > 0.0) {
            return Err(SweepError::Grid("bounds must be finite and positive".into()));
        }
        if self.eps_min >= self.eps_max {
            return Err(SweepError::Grid(format!("eps_min {} must be below eps_max {}", self.eps_min, self.eps_max)));
        }
        if self.points < 5 {
            return Err(SweepError::Grid(format!("need at least 5 points, got {}", self.points)));
        }
        Ok(())
    }

    /// Log-uniform grid including both endpoints.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.eps_min.log10(), self.eps_max.log10());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| match k {
                0 => self.eps_min,
                k if k + 1 == self.points => self.eps_max,
                k => 10f64.powf(a + (b - a) * k as f64 / last),
            })
            .collect()
    }
}

/// `max_i |E_i - E0|`.
pub fn splitting_magnitude(eigs: &[C64], e0: C64) -> f64 {
    eigs.iter().map(|e| (e - e0).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub numeric: f64,
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub alpha: f64,
    pub stderr: f64,
    pub used_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Option<ExponentFit>,
    /// Why `fit` is unset.
    pub fit_note: Option<String>,
    pub alpha_pred: Option<Exponent>,
    pub confidence: Option<Confidence>,
    pub noise_floor: f64,
}

pub const BELOW_NOISE: &str = "no-splitting or below noise floor";

/// Sweeps `eps` over the grid, diagonalising `H + eps H1` in the precision `T`.
pub fn run_sweep<T: Real>(
    h: &ComplexMatrix<T>,
    h1: &ComplexMatrix<T>,
    e0: C64,
    cfg: &SweepConfig,
    prediction: Option<&SplittingPrediction>,
) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    if h.shape() != h1.shape() || !h.is_square() {
        return Err(SweepError::Dimension { h: h.shape(), h1: h1.shape() });
    }
    let numeric: Vec<f64> = cfg
        .grid()
        .into_par_iter()
        .map(|eps| {
            let m = h.try_add(&h1.scale_real(T::from_f64(eps)))?;
            let eigs: Vec<C64> = eigenvalues(&m)?.into_iter().map(cnarrow).collect();
            Ok(splitting_magnitude(&eigs, e0))
        })
        .collect::<Result<_, LinalgError>>()?;

    let exact = prediction.filter(|p| p.confidence == Confidence::Exact);
    let rows: Vec<SweepRow> = cfg
        .grid()
        .into_iter()
        .zip(numeric)
        .map(|(eps, numeric)| SweepRow { eps, numeric, analytic: exact.and_then(|p| p.splitting_at(eps)) })
        .collect();

    let noise_floor = NOISE_FLOOR_REL * h.max_abs().to_f64().max(f64::MIN_POSITIVE);
    let usable: Vec<(f64, f64)> = rows.iter().filter(|r| r.numeric > noise_floor).map(|r| (r.eps, r.numeric)).collect();
    let (fit, fit_note) = match fit_exponent(&usable) {
        Ok(fit) => (Some(fit), None),
        Err(SweepError::TooFewRows(_)) => (None, Some(BELOW_NOISE.to_string())),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SweepResult {
        rows,
        fit,
        fit_note,
        alpha_pred: prediction.and_then(|p| p.alpha),
        confidence: prediction.map(|p| p.confidence),
        noise_floor,
    })
}

/// [`run_sweep`] on `f64` inputs, widened exactly to quad-double before
/// diagonalising.
pub fn run_sweep_extended(
    h: &ComplexMatrix,
    h1: &ComplexMatrix,
    e0: C64,
    cfg: &SweepConfig,
    prediction: Option<&SplittingPrediction>,
) -> Result<SweepResult, SweepError> {
    run_sweep::<Quad>(&h.convert(), &h1.convert(), e0, cfg, prediction)
}

/// Least-squares slope of `log dE` against `log eps`, with its standard error.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<ExponentFit, SweepError> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|(e, d)| *e > 0.0 && *d > 0.0).map(|(e, d)| (e.ln(), d.ln())).collect();
    let n = pts.len();
    if n < 3 {
        return Err(SweepError::TooFewRows(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(SweepError::DegenerateAbscissae);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - alpha * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(ExponentFit { alpha, stderr, used_rows: n })
}

/// CSV with header `epsilon,delta_e_numeric,delta_e_analytic,alpha_pred,confidence`.
pub fn to_csv(result: &SweepResult) -> String {
    let mut s = String::from("epsilon,delta_e_numeric,delta_e_analytic,alpha_pred,confidence\n");
    let alpha = result.alpha_pred.map(Exponent::ratio_string).unwrap_or_default();
    let conf = result.confidence.map(|c| c.to_string()).unwrap_or_default();
    for r in &result.rows {
        let analytic = r.analytic.map(format_f64).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", format_f64(r.eps), format_f64(r.numeric), analytic, alpha, conf);
    }
    s
}

pub fn write_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<(), SweepError> {
    write_file(path.as_ref(), &to_csv(result))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), SweepError> {
    fs::write(path, text).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFit {
    pub entries: Vec<C64>,
    pub fit: Option<ExponentFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub n: usize,
    pub j: usize,
    pub seed: u64,
    pub conjectured: Exponent,
    pub trials: Vec<TrialFit>,
}

impl ConjectureReport {
    fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.trials.iter().filter_map(|t| t.fit.map(|f| f.alpha))
    }

    pub fn mean_slope(&self) -> Option<f64> {
        let v: Vec<f64> = self.slopes().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn max_deviation(&self) -> Option<f64> {
        let target = self.conjectured.value();
        self.slopes().map(|a| (a - target).abs()).reduce(f64::max)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "conjecture test (not an assertion): N = {}, j = {}, conjectured alpha = {} = {:.4}, seed = {}",
            self.n,
            self.j,
            self.conjectured,
            self.conjectured.value(),
            self.seed
        );
        for (k, t) in self.trials.iter().enumerate() {
            match t.fit {
                Some(f) => {
                    let _ = writeln!(
                        s,
                        "trial {:>3}: alpha_fit = {:.4} +/- {:.1e}   conjectured {:.4}",
                        k + 1,
                        f.alpha,
                        f.stderr,
                        self.conjectured.value()
                    );
                }
                None => {
                    let _ = writeln!(s, "trial {:>3}: {BELOW_NOISE}", k + 1);
                }
            }
        }
        match (self.mean_slope(), self.max_deviation()) {
            (Some(m), Some(d)) => {
                let _ = writeln!(s, "mean alpha_fit = {m:.4}, max |alpha_fit - {}| = {d:.4}", self.conjectured);
            }
            _ => {
                let _ = writeln!(s, "no trial produced a usable fit");
            }
        }
        s
    }
}

/// Random entries on antidiagonal `j` of an otherwise empty projected
/// matrix, swept through `J_N + eps M` and fitted.
pub fn conjecture_check(
    n: usize,
    j: usize,
    trials: usize,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<ConjectureReport, SweepError> {
    if n < 2 || 2 * j < n || j >= n - 1 {
        return Err(SweepError::ConjectureRange { n, j });
    }
    if trials == 0 {
        return Err(SweepError::NoTrials);
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<C64>> = (0..trials)
        .map(|_| {
            (0..=j)
                .filter(|&k| j - k < n && k < n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let jordan = ComplexMatrix::<f64>::jordan_block(n);
    let results: Vec<TrialFit> = draws
        .into_par_iter()
        .map(|entries| {
            let mut m = ComplexMatrix::zeros(n, n);
            let ks = (0..=j).filter(|&k| j - k < n && k < n);
            for (k, z) in ks.zip(&entries) {
                // H1^{j-k,k} sits at row N-1-(j-k), column k.
                m[(n - 1 - (j - k), k)] = *z;
            }
            let r = run_sweep_extended(&jordan, &m, C64::new(0.0, 0.0), cfg, None)?;
            Ok(TrialFit { entries, fit: r.fit })
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(ConjectureReport { n, j, seed, conjectured: Exponent::reciprocal(n - j), trials: results })
}

#[derive(Debug, Clone)]
pub struct Fig1Series {
    pub label: String,
    pub prediction: SplittingPrediction,
    pub result: SweepResult,
}

#[derive(Debug, Clone)]
pub struct Fig1Dataset {
    pub params: SusyParams,
    pub config: SweepConfig,
    pub series: Vec<Fig1Series>,
}

/// Sweeps the five four-site perturbations at `omega0 = 0`, `gamma = J = 1`.
pub fn fig1_compute(cfg: &SweepConfig) -> Result<Fig1Dataset, SweepError> {
    let params = SusyParams { n: 4, omega0: 0.0, gamma: 1.0, j: 1.0 };
    let h: ComplexMatrix<Quad> = susy_hamiltonian(&params);
    let chain = reference_chain_susy4(params.j, params.omega0)?;
    let e0 = chain.e0();
    let narrow: Vec<(String, ComplexMatrix)> = susy_perturbations::<f64>(params.j);
    let wide: Vec<(String, ComplexMatrix<Quad>)> = susy_perturbations::<Quad>(params.j);
    let series = narrow
        .into_iter()
        .zip(wide)
        .map(|((label, h1), (_, h1_wide))| {
            let projected = project(&chain, &h1)?;
            let prediction = predict(&projected, &classify(&projected, DEFAULT_ZERO_TOL));
            let result = run_sweep(&h, &h1_wide, e0, cfg, Some(&prediction))?;
            Ok(Fig1Series { label, prediction, result })
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(Fig1Dataset { params, config: *cfg, series })
}

impl Fig1Dataset {
    pub fn svg(&self) -> String {
        let series: Vec<PlotSeries> = self
            .series
            .iter()
            .map(|s| {
                let points = s.result.rows.iter().map(|r| (r.eps, r.numeric)).collect();
                let curve: Vec<(f64, f64)> =
                    s.result.rows.iter().filter_map(|r| r.analytic.map(|a| (r.eps, a))).collect();
                let law = match s.prediction.alpha {
                    Some(a) if s.prediction.confidence == Confidence::Exact => format!("eps^{a}"),
                    _ => "0".to_string(),
                };
                PlotSeries { label: format!("{} ({law})", s.label), points, curve }
            })
            .collect();
        render_loglog(&series, "epsilon", "|dE|")
    }

    pub fn meta_json(&self) -> String {
        let slopes: serde_json::Map<String, serde_json::Value> = self
            .series
            .iter()
            .map(|s| {
                let v = match s.result.fit {
                    Some(f) => json!({ "alpha_fit": f.alpha, "stderr": f.stderr }),
                    None => json!({ "alpha_fit": null, "note": s.result.fit_note }),
                };
                (s.label.clone(), v)
            })
            .collect();
        let meta = json!({
            "model": { "n": self.params.n, "omega0": self.params.omega0, "gamma": self.params.gamma, "J": self.params.j },
            "grid": { "eps_min": self.config.eps_min, "eps_max": self.config.eps_max, "points": self.config.points, "spacing": "log" },
            "splitting": "max_i |E_i - E0|",
            "noise_floor_rel": NOISE_FLOOR_REL,
            "eigen_precision": "quad-double",
            "slopes": slopes,
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
        text.push('\n');
        text
    }

    /// Writes `fig1_p{k}.csv`, `fig1.svg` and `fig1_meta.json`.
    pub fn write(&self, outdir: &Path) -> Result<Vec<PathBuf>, SweepError> {
        let mut files: Vec<(PathBuf, String)> =
            self.series.iter().map(|s| (outdir.join(format!("fig1_{}.csv", s.label)), to_csv(&s.result))).collect();
        files.push((outdir.join("fig1.svg"), self.svg()));
        files.push((outdir.join("fig1_meta.json"), self.meta_json()));
        for (path, text) in &files {
            write_file(path, text)?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

/// Computes the benchmark dataset and writes it into `outdir`.
pub fn fig1_dataset(outdir: impl AsRef<Path>) -> Result<Fig1Dataset, SweepError> {
    let data = fig1_compute(&SweepConfig::default())?;
    data.write(outdir.as_ref())?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::predictor::ProjectedPerturbation;

    #[test]
    fn grid_is_log_uniform() {
        let g = SweepConfig::default().grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-8);
        assert_eq!(g[24], 1e-2);
        for w in g.windows(3) {
            let (a, b) = ((w[1] / w[0]).ln(), (w[2] / w[1]).ln());
            assert!((a - b).abs() < 1e-12);
        }
        assert!(SweepConfig { eps_min: 1e-2, eps_max: 1e-3, points: 10 }.validate().is_err());
        assert!(SweepConfig { eps_min: 1e-4, eps_max: 1e-3, points: 4 }.validate().is_err());
    }

    #[test]
    fn splitting_examples() {
        let e: Vec<C64> = (1..=4).map(|m| C64::from_polar(0.1, std::f64::consts::FRAC_PI_2 * m as f64)).collect();
        assert!((splitting_magnitude(&e, C64::new(0.0, 0.0)) - 0.1).abs() < 1e-16);
        assert_eq!(splitting_magnitude(&[c64(2.0, 1.0); 3], c64(2.0, 1.0)), 0.0);
        let d = [c64(0.0, 0.0), c64(1e-3, 0.0), c64(1e-3, 0.0), c64(0.0, 0.0)];
        assert_eq!(splitting_magnitude(&d, c64(0.0, 0.0)), 1e-3);
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        let g = SweepConfig::default().grid();
        let third: Vec<(f64, f64)> = g.iter().map(|e| (*e, e.powf(1.0 / 3.0))).collect();
        let f = fit_exponent(&third).unwrap();
        assert!((f.alpha - 1.0 / 3.0).abs() < 1e-12 && f.stderr < 1e-12);
        let lin: Vec<(f64, f64)> = g.iter().map(|e| (*e, 2.0 * e)).collect();
        assert!((fit_exponent(&lin).unwrap().alpha - 1.0).abs() < 1e-12);
        assert!(matches!(fit_exponent(&lin[..2]), Err(SweepError::TooFewRows(2))));
        let flat = vec![(1e-3, 1.0), (1e-3, 2.0), (1e-3, 3.0)];
        assert!(matches!(fit_exponent(&flat), Err(SweepError::DegenerateAbscissae)));
    }

    #[test]
    fn two_by_two_square_root() {
        let h = ComplexMatrix::jordan_block(2);
        let mut h1 = ComplexMatrix::zeros(2, 2);
        h1[(1, 0)] = c64(1.0, 0.0);
        let p = ProjectedPerturbation::from_matrix(h1.clone()).unwrap();
        let pred = predict(&p, &classify(&p, DEFAULT_ZERO_TOL));
        let r = run_sweep_extended(&h, &h1, c64(0.0, 0.0), &SweepConfig::default(), Some(&pred)).unwrap();
        for row in &r.rows {
            assert!((row.numeric - row.eps.sqrt()).abs() < 1e-12);
            assert!((row.analytic.unwrap() - row.numeric).abs() < 1e-12);
        }
        assert!((r.fit.unwrap().alpha - 0.5).abs() < 1e-10);
        assert_eq!(r.alpha_pred, Some(Exponent::reciprocal(2)));
    }

    #[test]
    fn nilpotent_sweep_has_no_fit() {
        let h = ComplexMatrix::jordan_block(4);
        let h1 = ComplexMatrix::from_fn(4, 4, |r, c| if c > r { c64(0.7, 0.1) } else { c64(0.0, 0.0) });
        let r = run_sweep_extended(&h, &h1, c64(0.0, 0.0), &SweepConfig::default(), None).unwrap();
        assert!(r.fit.is_none());
        assert_eq!(r.fit_note.as_deref(), Some(BELOW_NOISE));
        assert!(r.rows.iter().all(|row| row.numeric < 1e-9));
    }

    #[test]
    fn csv_layout() {
        let h = ComplexMatrix::jordan_block(2);
        let mut h1 = ComplexMatrix::zeros(2, 2);
        h1[(1, 0)] = c64(1.0, 0.0);
        let cfg = SweepConfig { eps_min: 1e-4, eps_max: 1e-2, points: 5 };
        let r = run_sweep_extended(&h, &h1, c64(0.0, 0.0), &cfg, None).unwrap();
        let csv = to_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epsilon,delta_e_numeric,delta_e_analytic,alpha_pred,confidence");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("1.0000000000000000e-4,1.0000000000000000e-2,,,"), "{}", lines[1]);
    }

    #[test]
    fn conjecture_range_is_enforced() {
        let cfg = SweepConfig::default();
        assert!(matches!(conjecture_check(4, 1, 3, &cfg, 1), Err(SweepError::ConjectureRange { .. })));
        assert!(matches!(conjecture_check(4, 3, 3, &cfg, 1), Err(SweepError::ConjectureRange { .. })));
        let rep = conjecture_check(4, 2, 3, &cfg, 7).unwrap();
        assert_eq!(rep.trials.len(), 3);
        assert_eq!(rep.conjectured, Exponent::reciprocal(2));
        assert_eq!(rep, conjecture_check(4, 2, 3, &cfg, 7).unwrap());
        assert!(rep.render().contains("conjecture test"));
    }
}
