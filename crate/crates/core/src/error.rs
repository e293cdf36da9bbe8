//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1 within {tol}")]
    RowSumMismatch { row: usize, sum: f64, tol: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("chain is not ergodic (irreducible: {irreducible}, aperiodic: {aperiodic})")]
    NotErgodic { irreducible: bool, aperiodic: bool },
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("no convergence after {iters} iterations (residual {residual})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("beta must be positive, got {0}")]
    BetaNonPositive(f64),
    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    CostNotFinite { row: usize, col: usize },
    #[error("eigenpair does not solve this problem: residual {residual} > {max}")]
    ResidualTooLarge { residual: f64, max: f64 },
    #[error("uncontrolled chain does not satisfy detailed balance (defect {defect})")]
    NotReversible { defect: f64 },
    #[error("costs are not state costs (rows are not constant)")]
    NotStateCost,
    #[error("costs are not symmetric")]
    NotSymmetric,
    #[error("eigenpair has normalization {found:?}, expected {expected:?}")]
    WrongNormalization {
        expected: crate::klproblem::Normalization,
        found: crate::klproblem::Normalization,
    },
    #[error("learner state corrupt at step {step}: {reason}")]
    StateCorrupt { step: u64, reason: String },
    #[error("lambda must be positive, got {0}")]
    LambdaNonPositive(f64),
    #[error("ODE path blew up at t = {t}")]
    Blowup { t: f64 },
    #[error("paths have no overlap inside the window [{lo}, {hi}]")]
    EmptyOverlap { lo: f64, hi: f64 },
    #[error("eigenvalue iteration failed to converge")]
    EigenNoConvergence,
    #[error("grid rows have unequal lengths")]
    NonRectangular,
    #[error("grid has more than one goal cell")]
    MultipleGoals,
    #[error("grid has no goal cell")]
    NoGoal,
    #[error("unknown grid character {ch:?} at row {row}, column {col}")]
    UnknownChar { ch: char, row: usize, col: usize },
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
