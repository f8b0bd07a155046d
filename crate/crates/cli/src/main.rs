use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use epsplit_core::jordan::{
    build_chain, reference_chain_susy4, verify_chain, ChainGauge, ChainOptions, JordanChain, JordanError,
};
use epsplit_core::linalg::{format_complex, ComplexMatrix, LinalgError, Quad, C64, DEFAULT_RANK_TOL};
use epsplit_core::models::{
    chain_to_json_string, load_chain, susy_hamiltonian, susy_perturbations, MatrixFile, ModelError, SusyParams,
};
use epsplit_core::predictor::{
    classify, predict, project, CaseTag, PredictError, ProjectedPerturbation, SplittingPrediction, DEFAULT_ZERO_TOL,
};
use epsplit_core::sweep::{self, SweepConfig, SweepError, SweepResult, DEFAULT_SEED};

const EXIT_IO: u8 = 1;
const EXIT_MATH: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
enum CliError {
    Io(String),
    Math(String),
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Math(_) => EXIT_MATH,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Math(m) | CliError::Usage(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Chain { .. } => CliError::Math(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<JordanError> for CliError {
    fn from(e: JordanError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Io { .. } => CliError::Io(e.to_string()),
            SweepError::Grid(_) | SweepError::ConjectureRange { .. } | SweepError::NoTrials => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Splitting exponents of perturbed exceptional points.
#[derive(Debug, Parser)]
#[command(name = "epsplit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and verify the Jordan chain of an exceptional point.
    Jordan(JordanArgs),
    /// Project a perturbation onto a chain and print the pattern.
    Project(ProjectArgs),
    /// Classify a projected perturbation and predict its splitting.
    Predict(PredictArgs),
    /// Sweep the perturbation strength and fit the splitting exponent.
    Sweep(SweepArgs),
    /// Fit exponents for random perturbations in the conjecture-only range.
    Conjecture(ConjectureArgs),
    /// Reproduce the four-site benchmark dataset (CSV, SVG, metadata).
    Fig1(Fig1Args),
}

#[derive(Debug, Args)]
struct JordanArgs {
    /// Hamiltonian matrix file.
    #[arg(long)]
    input: PathBuf,
    /// EP energy as RE,IM.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    e0: C64,
    /// Order of the exceptional point.
    #[arg(long)]
    order: usize,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// Acceptance bound on chain residuals.
    #[arg(long, default_value_t = epsplit_core::jordan::DEFAULT_CHAIN_TOL)]
    chain_tol: f64,
    /// Gauge used to fix the chain.
    #[arg(long, value_enum, default_value_t = GaugeArg::PivotRow)]
    gauge: GaugeArg,
    /// Where to write the chain.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum GaugeArg {
    PivotRow,
    MinNorm,
}

impl From<GaugeArg> for ChainGauge {
    fn from(g: GaugeArg) -> Self {
        match g {
            GaugeArg::PivotRow => ChainGauge::PivotRow,
            GaugeArg::MinNorm => ChainGauge::MinNorm,
        }
    }
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Perturbation matrix file.
    #[arg(long)]
    pert: PathBuf,
    /// Entries below ZERO_TOL * max|M| count as zero.
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Optional file for the projected matrix.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long)]
    pert: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Print branch energies at this perturbation strength.
    #[arg(long)]
    eps: Option<f64>,
    /// Optional file for the prediction JSON (printed to stdout otherwise).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-8)]
    eps_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    eps_max: f64,
    #[arg(long, default_value_t = 25)]
    points: usize,
}

impl GridArgs {
    fn config(self) -> Result<SweepConfig, CliError> {
        let cfg = SweepConfig { eps_min: self.eps_min, eps_max: self.eps_max, points: self.points };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Hamiltonian matrix file.
    #[arg(long, required_unless_present = "susy", conflicts_with = "susy")]
    hamiltonian: Option<PathBuf>,
    /// Built-in graded array instead of a file: N,OMEGA0,GAMMA,J.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_susy)]
    susy: Option<SusyParams>,
    /// Perturbation matrix file.
    #[arg(long, required_unless_present = "susy_pert", conflicts_with = "susy_pert")]
    pert: Option<PathBuf>,
    /// Built-in four-site perturbation 1..5 (needs --susy with N = 4).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    susy_pert: Option<u8>,
    /// EP energy as RE,IM (defaults to OMEGA0 with --susy).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    e0: Option<C64>,
    /// Chain used for the analytic prediction; built from H when omitted.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConjectureArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    j: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Random seed (overrides EPSPLIT_SEED; default 42).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct Fig1Args {
    #[arg(long)]
    outdir: PathBuf,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err("expected RE,IM".to_string()),
    }
}

fn parse_susy(s: &str) -> Result<SusyParams, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, omega0, gamma, j] = parts.as_slice() else {
        return Err("expected N,OMEGA0,GAMMA,J".to_string());
    };
    let n: usize = n.parse().map_err(|_| format!("`{n}` is not a site count"))?;
    if n < 2 {
        return Err("the array needs at least 2 sites".to_string());
    }
    let f = |t: &str| {
        t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    Ok(SusyParams { n, omega0: f(omega0)?, gamma: f(gamma)?, j: f(j)? })
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("EPSPLIT_SEED") {
        Ok(v) => {
            v.trim().parse().map_err(|_| CliError::Usage(format!("EPSPLIT_SEED=`{v}` is not an unsigned integer")))
        }
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Fails early when an output file could not be created.
fn check_output(path: &Path) -> CliResult {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Io(format!("{}: parent directory does not exist", path.display())));
    }
    if path.is_dir() {
        return Err(CliError::Io(format!("{}: is a directory", path.display())));
    }
    Ok(())
}

fn write_output(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn check_tol(name: &str, v: f64) -> CliResult {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must lie in (0, 1), got {v}")))
    }
}

fn print_report(chain: &JordanChain, h: &ComplexMatrix) -> CliResult {
    let rep = verify_chain(chain, h)?;
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    println!("chain of order {} at E0 = {}", chain.order(), format_complex(chain.e0()));
    println!("right residuals:       {}", list(&rep.right_residuals));
    println!("left residuals:        {}", list(&rep.left_residuals));
    println!("biorthogonality error: {:.3e}", rep.biorthogonality_error);
    println!("geometric multiplicity: {}", rep.geometric_multiplicity);
    Ok(())
}

fn cmd_jordan(a: JordanArgs) -> CliResult {
    check_tol("tol", a.tol)?;
    check_tol("chain-tol", a.chain_tol)?;
    check_output(&a.output)?;
    let h = MatrixFile::load(&a.input)?.matrix;
    if a.order == 0 || h.rows() != a.order {
        return Err(CliError::Usage(format!(
            "--order {} does not match the {}x{} matrix",
            a.order,
            h.rows(),
            h.cols()
        )));
    }
    let chain = build_chain(
        &h,
        a.e0,
        a.order,
        ChainOptions { rank_tol: a.tol, chain_tol: a.chain_tol, gauge: a.gauge.into() },
    )?;
    print_report(&chain, &h)?;
    write_output(&a.output, &chain_to_json_string(&chain))?;
    println!("wrote {}", a.output.display());
    Ok(())
}

fn load_projection(chain: &Path, pert: &Path) -> Result<ProjectedPerturbation, CliError> {
    let chain = load_chain(chain)?;
    let h1 = MatrixFile::load(pert)?.matrix;
    Ok(project(&chain, &h1)?)
}

fn summary_line(pred: &SplittingPrediction) -> String {
    match (pred.case.tag, pred.confidence) {
        (CaseTag::NoSplit, _) => "Case1, no splitting".to_string(),
        (tag, conf) => {
            let mut s = format!("{tag}");
            if let Some(a) = pred.alpha {
                s.push_str(&format!(", alpha = {a}"));
            }
            s.push_str(&format!(", {conf}"));
            if let Some(v) = pred.verdict {
                s.push_str(&format!(", {v}"));
            }
            s
        }
    }
}

fn cmd_project(a: ProjectArgs) -> CliResult {
    check_tol("zero-tol", a.zero_tol)?;
    if let Some(out) = &a.output {
        check_output(out)?;
    }
    let p = load_projection(&a.chain, &a.pert)?;
    print!("{}", p.matrix());
    println!("case: {}", classify(&p, a.zero_tol).tag);
    if let Some(out) = &a.output {
        write_output(out, &MatrixFile::new(p.matrix().clone()).with_label("projected").to_json_string())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> CliResult {
    check_tol("zero-tol", a.zero_tol)?;
    if let Some(eps) = a.eps {
        if !eps.is_finite() {
            return Err(CliError::Usage(format!("--eps must be finite, got {eps}")));
        }
    }
    if let Some(out) = &a.output {
        check_output(out)?;
    }
    let p = load_projection(&a.chain, &a.pert)?;
    let cls = classify(&p, a.zero_tol);
    let pred = predict(&p, &cls);
    println!("projected perturbation:");
    print!("{}", p.matrix());
    println!("case: {}", cls.tag);
    match pred.alpha {
        Some(alpha) => println!("alpha = {alpha}"),
        None => println!("alpha = undefined"),
    }
    if let Some(c) = pred.coefficient {
        println!("coefficient = {}", format_complex(c));
    }
    println!("confidence: {}", pred.confidence);
    if let Some(v) = pred.verdict {
        println!("{v}");
    }
    if let Some(eps) = a.eps {
        let b = pred.branches(eps);
        if b.is_empty() {
            println!("no analytic branches at eps = {eps:e}");
        } else {
            println!("branches at eps = {eps:e}:");
            for (m, z) in b.iter().enumerate() {
                println!("  lambda_{} = {}", m + 1, format_complex(*z));
            }
        }
    }
    println!("{}", summary_line(&pred));
    let json = serde_json::to_string_pretty(&pred.to_json(a.eps)).expect("prediction serialises") + "\n";
    match &a.output {
        Some(out) => {
            write_output(out, &json)?;
            println!("wrote {}", out.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CliResult {
    let cfg = a.grid.config()?;
    check_tol("zero-tol", a.zero_tol)?;
    check_output(&a.out)?;
    if let Some(svg) = &a.svg {
        check_output(svg)?;
    }
    let (h, h_wide): (ComplexMatrix, ComplexMatrix<Quad>) = match (&a.hamiltonian, &a.susy) {
        (Some(path), _) => {
            let h = MatrixFile::load(path)?.matrix;
            let wide = h.convert();
            (h, wide)
        }
        (None, Some(p)) => (susy_hamiltonian(p), susy_hamiltonian(p)),
        (None, None) => unreachable!("clap requires one source"),
    };
    let (h1, h1_wide): (ComplexMatrix, ComplexMatrix<Quad>) = match (&a.pert, a.susy_pert) {
        (Some(path), _) => {
            let h1 = MatrixFile::load(path)?.matrix;
            let wide = h1.convert();
            (h1, wide)
        }
        (None, Some(k)) => {
            let Some(p) = a.susy.filter(|p| p.n == 4) else {
                return Err(CliError::Usage("--susy-pert needs --susy with N = 4".into()));
            };
            let k = usize::from(k) - 1;
            (susy_perturbations::<f64>(p.j).swap_remove(k).1, susy_perturbations::<Quad>(p.j).swap_remove(k).1)
        }
        (None, None) => unreachable!("clap requires one perturbation"),
    };
    if h.shape() != h1.shape() {
        return Err(CliError::Math(format!(
            "dimension mismatch: H is {}x{}, H1 is {}x{}",
            h.rows(),
            h.cols(),
            h1.rows(),
            h1.cols()
        )));
    }
    let e0 = match (a.e0, a.susy) {
        (Some(e), _) => e,
        (None, Some(p)) => C64::new(p.omega0, 0.0),
        (None, None) => return Err(CliError::Usage("--e0 is required with --hamiltonian".into())),
    };

    let chain = match &a.chain {
        Some(path) => Some(load_chain(path)?),
        None => default_chain(&h, e0, a.susy),
    };
    let prediction = match &chain {
        Some(c) => {
            let p = project(c, &h1)?;
            Some(predict(&p, &classify(&p, a.zero_tol)))
        }
        None => {
            println!("note: no Jordan chain of order {} at E0; sweeping without a prediction", h.rows());
            None
        }
    };
    let result = sweep::run_sweep(&h_wide, &h1_wide, e0, &cfg, prediction.as_ref())?;
    let svg = a.svg.as_ref().map(|_| sweep_svg(&result));

    if let Some(p) = &prediction {
        println!("prediction: {}", summary_line(p));
    }
    print_fit(&result, prediction.as_ref());
    write_output(&a.out, &sweep::to_csv(&result))?;
    println!("wrote {}", a.out.display());
    if let (Some(path), Some(text)) = (&a.svg, svg) {
        write_output(path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// The closed-form chain for the built-in four-site array at its EP,
/// otherwise a numerically built one when `h` has a single chain at `e0`.
fn default_chain(h: &ComplexMatrix, e0: C64, susy: Option<SusyParams>) -> Option<JordanChain> {
    if let Some(p) = susy.filter(|p| p.n == 4 && p.gamma == p.j && e0 == C64::new(p.omega0, 0.0)) {
        if let Ok(c) = reference_chain_susy4(p.j, p.omega0) {
            return Some(c);
        }
    }
    build_chain(h, e0, h.rows(), ChainOptions::default()).ok()
}

fn print_fit(result: &SweepResult, prediction: Option<&SplittingPrediction>) {
    let pred = match result.alpha_pred {
        Some(a) => a.ratio_string(),
        None => "n/a".to_string(),
    };
    match result.fit {
        Some(f) => println!("alpha_fit = {:.3} +/- {:.1e}, alpha_pred = {pred}", f.alpha, f.stderr),
        None => {
            let case1 = prediction.is_some_and(|p| p.case.tag == CaseTag::NoSplit);
            let suffix = if case1 { " (Case 1)" } else { "" };
            println!("below noise floor; no splitting detected{suffix}");
        }
    }
}

fn sweep_svg(result: &SweepResult) -> String {
    let points = result.rows.iter().map(|r| (r.eps, r.numeric)).collect();
    let curve = result.rows.iter().filter_map(|r| r.analytic.map(|a| (r.eps, a))).collect();
    let label = match result.fit {
        Some(f) => format!("numeric, fit {:.3}", f.alpha),
        None => "numeric".to_string(),
    };
    epsplit_core::plot::render_loglog(&[epsplit_core::plot::PlotSeries { label, points, curve }], "epsilon", "|dE|")
}

fn cmd_conjecture(a: ConjectureArgs) -> CliResult {
    let cfg = a.grid.config()?;
    if a.n < 3 || 2 * a.j < a.n || a.j >= a.n - 1 {
        return Err(CliError::Usage(format!(
            "j = {} is outside the conjecture-only range (N-1)/2 < j < N-1 for N = {}",
            a.j, a.n
        )));
    }
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let seed = resolve_seed(a.seed)?;
    let report = sweep::conjecture_check(a.n, a.j, a.trials, &cfg, seed)?;
    print!("{}", report.render());
    Ok(())
}

fn cmd_fig1(a: Fig1Args) -> CliResult {
    if a.outdir.exists() && !a.outdir.is_dir() {
        return Err(CliError::Io(format!("{}: not a directory", a.outdir.display())));
    }
    let data = sweep::fig1_compute(&SweepConfig::default())?;
    std::fs::create_dir_all(&a.outdir).map_err(|e| CliError::Io(format!("{}: {e}", a.outdir.display())))?;
    data.write(&a.outdir)?;
    println!("perturbation  case               alpha_pred  alpha_fit");
    for s in &data.series {
        let pred = s.prediction.alpha.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
        let fit = match s.result.fit {
            Some(f) => format!("{:.2}", f.alpha),
            None => "n/a".to_string(),
        };
        println!("{:<13} {:<18} {:<11} {}", s.label, s.prediction.case.tag.to_string(), pred, fit);
    }
    println!("wrote fig1_p1..p5.csv, fig1.svg, fig1_meta.json to {}", a.outdir.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Jordan(a) => cmd_jordan(a),
        Command::Project(a) => cmd_project(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Conjecture(a) => cmd_conjecture(a),
        Command::Fig1(a) => cmd_fig1(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
