//! Splitting-exponent prediction for perturbed exceptional points.
//!
//! A Hamiltonian with an order-`N` exceptional point is brought to its
//! Jordan chain ([`jordan`]), a perturbation is projected onto that chain
//! and classified ([`predictor`]), and the prediction is checked against
//! full eigenvalue sweeps ([`sweep`]). [`models`] holds the benchmark
//! array and the JSON containers; [`linalg`] is the dense numerical layer.

pub mod jordan;
pub mod linalg;
pub mod models;
pub mod plot;
pub mod predictor;
pub mod sweep;

pub use jordan::{
    build_chain, reference_chain_susy4, verify_chain, ChainGauge, ChainOptions, ChainReport, JordanChain, JordanError,
};
pub use linalg::{c64, ComplexMatrix, LinalgError, Quad, Real, C64};
pub use models::{susy_hamiltonian, susy_perturbations, MatrixFile, ModelError, SusyParams};
pub use predictor::{
    classify, predict, project, reduced_eigenpairs, reduced_matrix, CaseClass, CaseTag, Confidence, EpVerdict,
    Exponent, ProjectedPerturbation, ReducedEigenpair, SplittingPrediction,
};
pub use sweep::{
    conjecture_check, fig1_dataset, fit_exponent, run_sweep, run_sweep_extended, splitting_magnitude, ConjectureReport,
    SweepConfig, SweepError, SweepResult,
};
