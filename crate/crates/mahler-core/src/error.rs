//! Error channels shared by all kernels.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the exact kernels.
///
/// Each variant corresponds to a contract violation or an honest refusal:
/// unsupported splitting fields, insufficient precision, exhausted search
/// budgets. None of them is used for ordinary control flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// Inversion of a series that is zero up to its stated precision.
    DivisionByZeroSeries,
    /// A valuation was requested but all known coefficients vanish.
    IndeterminateValuation,
    /// The requested operation needs more known coefficients than available.
    PrecisionLoss(String),
    /// A gauge matrix is singular at working precision.
    SingularGauge,
    /// Cyclic-vector search exhausted its candidate budget.
    CyclicSearchExhausted,
    /// The factorization coefficient recurrence has no solution at some step.
    FactorRecurrenceStuck(String),
    /// Eigenvalue data does not fit in a single simple extension of Q.
    UnsupportedSplitting(String),
    /// Hermite-Pade guessing found no relation within the bounds.
    NoRelationFound,
    /// Standardization exceeded its recursion budget.
    RecursionBudgetExceeded,
    /// Regular-singular reduction applied to a system of the wrong shape.
    NotRegularSingularShape,
    /// Not enough samples for an empirical growth classification.
    InsufficientData,
    /// Arguments violate a documented precondition.
    InvalidArgument(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DivisionByZeroSeries => write!(f, "division by a series that is zero to its precision"),
            CoreError::IndeterminateValuation => write!(f, "valuation indeterminate: all known coefficients vanish"),
            CoreError::PrecisionLoss(m) => write!(f, "precision loss: {m}"),
            CoreError::SingularGauge => write!(f, "gauge matrix singular at working precision"),
            CoreError::CyclicSearchExhausted => write!(f, "cyclic vector search exhausted its budget"),
            CoreError::FactorRecurrenceStuck(m) => write!(f, "factorization recurrence stuck: {m}"),
            CoreError::UnsupportedSplitting(m) => write!(f, "unsupported splitting: {m}"),
            CoreError::NoRelationFound => write!(f, "no annihilating relation found within the bounds"),
            CoreError::RecursionBudgetExceeded => write!(f, "standardization recursion budget exceeded"),
            CoreError::NotRegularSingularShape => write!(f, "system is not in regular singular shape"),
            CoreError::InsufficientData => write!(f, "not enough samples for classification"),
            CoreError::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
