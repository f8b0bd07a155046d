use epsplit_core::sweep::{to_csv, write_csv, NOISE_FLOOR_REL};
use epsplit_core::{
    c64, conjecture_check, fit_exponent, run_sweep, run_sweep_extended, ComplexMatrix, SweepConfig, SweepError,
};

#[test]
fn grid_is_log_uniform_with_exact_endpoints() {
    let cfg = SweepConfig { eps_min: 1e-6, eps_max: 1e-1, points: 6 };
    let g = cfg.grid();
    assert_eq!(g.first(), Some(&1e-6));
    assert_eq!(g.last(), Some(&1e-1));
    for w in g.windows(2) {
        assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
    }
}

#[test]
fn invalid_grids_are_rejected() {
    for cfg in [
        SweepConfig { eps_min: 1e-2, eps_max: 1e-3, points: 10 },
        SweepConfig { eps_min: 0.0, eps_max: 1e-3, points: 10 },
        SweepConfig { eps_min: 1e-6, eps_max: 1e-3, points: 4 },
    ] {
        assert!(matches!(cfg.validate(), Err(SweepError::Grid(_))), "{cfg:?}");
    }
}

#[test]
fn fit_recovers_an_exact_power_law() {
    let rows: Vec<(f64, f64)> = SweepConfig::default().grid().into_iter().map(|e| (e, 3.0 * e.powf(0.2))).collect();
    let fit = fit_exponent(&rows).unwrap();
    assert!((fit.alpha - 0.2).abs() < 1e-12);
    assert!(fit.stderr < 1e-12);
    assert_eq!(fit.used_rows, rows.len());
}

#[test]
fn two_by_two_block_sweeps_with_square_root() {
    let mut h1 = ComplexMatrix::zeros(2, 2);
    h1[(1, 0)] = c64(1.0, 0.0);
    let res = run_sweep(&ComplexMatrix::jordan_block(2), &h1, c64(0.0, 0.0), &SweepConfig::default(), None).unwrap();
    let fit = res.fit.unwrap();
    assert!((fit.alpha - 0.5).abs() < 1e-6);
    assert!(res.noise_floor <= NOISE_FLOOR_REL);
    for r in &res.rows {
        assert!((r.numeric - r.eps.sqrt()).abs() < 1e-12);
        assert!(r.analytic.is_none());
    }
}

#[test]
fn upper_triangular_perturbation_stays_silent() {
    let mut h1 = ComplexMatrix::zeros(3, 3);
    h1[(0, 2)] = c64(1.0, 0.0);
    let res =
        run_sweep_extended(&ComplexMatrix::jordan_block(3), &h1, c64(0.0, 0.0), &SweepConfig::default(), None).unwrap();
    assert!(res.fit.is_none());
    assert!(res.fit_note.is_some());
    assert!(res.rows.iter().all(|r| r.numeric == 0.0));
}

#[test]
fn csv_layout() {
    let mut h1 = ComplexMatrix::zeros(2, 2);
    h1[(1, 0)] = c64(2.0, 0.0);
    let cfg = SweepConfig { eps_min: 1e-4, eps_max: 1e-2, points: 5 };
    let res = run_sweep(&ComplexMatrix::jordan_block(2), &h1, c64(0.0, 0.0), &cfg, None).unwrap();
    let csv = to_csv(&res);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,delta_e_numeric,delta_e_analytic,alpha_pred,confidence");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1.0000000000000000e-4,"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_csv(&res, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);
    assert!(write_csv(&res, dir.path().join("missing/s.csv")).is_err());
}

#[test]
fn conjecture_draws_depend_only_on_the_seed() {
    let cfg = SweepConfig::default();
    let a = conjecture_check(5, 3, 3, &cfg, 7).unwrap();
    let b = conjecture_check(5, 3, 3, &cfg, 7).unwrap();
    let c = conjecture_check(5, 3, 3, &cfg, 8).unwrap();
    assert_eq!(a.render(), b.render());
    assert_ne!(a.trials[0].entries, c.trials[0].entries);
    assert!(a.max_deviation().unwrap() < 0.01);
    assert!(conjecture_check(5, 1, 3, &cfg, 7).is_err());
    assert!(conjecture_check(5, 3, 0, &cfg, 7).is_err());
}
