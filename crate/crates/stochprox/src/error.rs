use thiserror::Error;

use crate::core::ScheduleClass;

/// Errors surfaced by problem construction, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("solver aborted: non-finite iterate at step {step}")]
    NonFiniteIterate { step: usize },

    #[error("empty component pair list")]
    EmptyPairs,

    #[error("negative weight at index {index}: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to zero")]
    ZeroTotalWeight,

    #[error("weights/pairs length mismatch: {pairs} pairs, {weights} weights")]
    WeightCountMismatch { pairs: usize, weights: usize },

    #[error("invalid step schedule: {reason}")]
    InvalidSchedule { reason: String },

    #[error("schedule index {index} beyond explicit list of length {len}")]
    ScheduleIndexOutOfRange { index: usize, len: usize },

    #[error("schedule classified as {class:?}, not Robbins-Monro; enable the invalid-schedule override to run anyway")]
    ScheduleNotRobbinsMonro { class: ScheduleClass },

    #[error("iteration budget must be at least 1")]
    ZeroBudget,

    #[error("record_every must be at least 1")]
    ZeroRecordEvery,

    #[error("forward-backward step bound violated: sup gamma = {sup_gamma} >= 2/beta = {limit}")]
    StepBoundViolated { sup_gamma: f64, limit: f64 },

    #[error("pair {index} ({label}) has a nonzero smooth part; stochastic proximal point requires g = 0")]
    NonzeroSmoothPart { index: usize, label: String },

    #[error("pair {index} ({label}) has a nonzero proxable part; stochastic gradient requires f = 0")]
    NonzeroProxablePart { index: usize, label: String },

    #[error("missing subgradient selection for pair {index}")]
    MissingSubgradient { index: usize },

    #[error("missing min-norm subgradient oracle on pair {index}")]
    MissingMinNormSubgrad { index: usize },

    #[error("brute-force prox incumbent on search-box boundary (coordinate {coord}); enlarge the domain")]
    BruteForceBoundary { coord: usize },

    #[error("box constraint invalid: lo > hi at coordinate {coord}")]
    InvalidBox { coord: usize },

    #[error("set normal vector must be nonzero")]
    ZeroNormal,

    #[error("ball radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },

    #[error("cohort {cohort:?} is empty; both noisy and clean samples are required")]
    EmptyCohort { cohort: &'static str },

    #[error("alpha must lie in (0, 1), got {value}")]
    AlphaOutOfRange { value: f64 },

    #[error("dataset parse error at line {line}: {reason}")]
    DatasetFormat { line: usize, reason: String },

    #[error("fewer than 2 checkpoints; nothing to monitor")]
    TooFewCheckpoints,

    #[error("point {index} lies outside the domain of some f_k")]
    PointOutsideDomain { index: usize },

    #[error("reference solver failure: {reason}")]
    ReferenceFailure { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
