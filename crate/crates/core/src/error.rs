use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Which of the Bowen gap-schedule constraints failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Inequality {
    /// Σ α_n must stay below twice the generation-1 atom length.
    SumTooLarge { sum: f64, bound: f64 },
    /// α_{n+1} < α_n failed at this (1-based) generation.
    NotDecreasing { generation: usize },
    /// α_1 must be shorter than the generation-0 gap.
    FirstGapTooWide { alpha1: f64, central_gap: f64 },
    /// Every α_n (and k) must be positive and finite.
    NonPositive,
    /// Explicit list does not cover generations 1..N-1.
    ScheduleTooShort { needed: usize, given: usize },
    /// Generation-0 gap must be nonempty and strictly inside the ambient interval.
    CentralGap,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inequality::SumTooLarge { sum, bound } => {
                write!(f, "sum of alpha_n < 2*(atom-1 length) violated: {sum} >= {bound}")
            }
            Inequality::NotDecreasing { generation } => {
                write!(f, "alpha_(n+1) < alpha_n violated at n = {generation}")
            }
            Inequality::FirstGapTooWide { alpha1, central_gap } => {
                write!(f, "alpha_1 < 2*b0 violated: {alpha1} >= {central_gap}")
            }
            Inequality::NonPositive => f.write_str("alpha_n > 0 violated"),
            Inequality::ScheduleTooShort { needed, given } => {
                write!(f, "explicit alpha list needs {needed} entries, got {given}")
            }
            Inequality::CentralGap => f.write_str("0 < b0 and 2*b0 < ambient length violated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate interval: lo must be strictly below hi")]
    DegenerateInterval,
    #[error("piece is not expanding: minimum slope {min_slope} <= 1")]
    RatioInfeasible { min_slope: f64 },
    #[error("point {x} outside the piece domain")]
    OutOfDomain { x: f64 },
    #[error("pieces do not tile [-1, 1]: mismatch {mismatch} at {at}")]
    Tiling { at: f64, mismatch: f64 },
    #[error("map is not C0: residual {residual} at {at}")]
    NotC0 { at: f64, residual: f64 },
    #[error("map is not C1: residual {residual} at {at}")]
    NotC1 { at: f64, residual: f64 },
    #[error("map is not expanding: lambda = {lambda}")]
    NotExpanding { lambda: f64 },
    #[error("Bowen parameters infeasible: {0}")]
    ParamsInfeasible(Inequality),
    #[error("gap of generation {generation} does not fit inside its atom")]
    GapOverflow { generation: usize },
    #[error("word length {len} exceeds the available depth {max}")]
    WordTooLong { len: usize, max: usize },
    #[error("gap ratio {ratio} <= 2 at generation {generation}")]
    GapRatioError { generation: usize, ratio: f64 },
    #[error("glue segment {segment} has ratio {ratio} <= 2")]
    GlueRatioError { segment: &'static str, ratio: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(&'static str),
    #[error("gap/atom conjugacy violated (max residual {max_residual}) for words {words:?}")]
    ConjugacyViolation { max_residual: f64, words: Vec<String> },
    #[error("observable and measure live on different spaces")]
    DomainMismatch,
    #[error("operation not supported for this measure variant: {0}")]
    UnsupportedVariant(&'static str),
    #[error("invalid measure: {0}")]
    InvalidMeasure(&'static str),
    #[error("requested depth {requested} exceeds available depth {available}")]
    DepthExceeded { requested: usize, available: usize },
    #[error("unknown Cantor carrier label `{0}`")]
    UnknownCarrier(String),
}
