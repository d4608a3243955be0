use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical routines.
///
/// The variants split into two families: input/validation problems (bad
/// polynomial literal, violated preconditions) and numerical failures
/// (undercounted roots, solver breakdown). [`Error::is_numerical`] tells
/// them apart so front ends can pick an exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("leading coefficient |a_d| = {magnitude:e} is below zero-tolerance {tolerance:e}")]
    DegenerateLeadingCoefficient { magnitude: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {what} needs {needed} nodes, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u64,
    },

    #[error("undercount at period {period}: found {found_count} of {expected} roots")]
    Undercount {
        period: usize,
        expected: usize,
        found_count: usize,
        found: Vec<(Complex64, usize)>,
    },

    #[error("cycle-grouping failure at period {period}: {detail}")]
    CycleGrouping { period: usize, detail: String },

    #[error("preimage solver did not converge for w = {w}")]
    PreimageSolver { w: Complex64 },

    #[error("base point rejected: G(w0) = {green:e} is below {threshold:e} (w0 inside or too close to K(P))")]
    BaseInFilledSet { green: f64, threshold: f64 },

    #[error("insufficient periods: growth check needs {needed}, spectrum has {available}")]
    InsufficientPeriods { needed: usize, available: usize },

    #[error("empty repelling spectrum")]
    EmptyRepellingSpectrum,

    #[error("Im(t) = {im} is below the minimum admissible {min}")]
    BelowMinimumPotential { im: f64, min: f64 },

    #[error("overflow-safe range exceeded: Im(d^n t) = {value} > {limit}")]
    OverflowRange { value: f64, limit: f64 },

    #[error("finite-difference breakdown: {0}")]
    FiniteDifference(String),

    #[error("ray tracing failed at potential {potential:e}: {detail}")]
    RayTracing { potential: f64, detail: String },

    #[error("exceptional point {0}: backward orbit collapses")]
    ExceptionalPoint(Complex64),

    #[error("inputs come from different polynomials ({left} vs {right})")]
    FingerprintMismatch { left: String, right: String },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Undercount { .. }
                | Error::CycleGrouping { .. }
                | Error::PreimageSolver { .. }
                | Error::RayTracing { .. }
                | Error::FiniteDifference(_)
        )
    }
}
