use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("coefficient `{source_text}` is not positive at t = {t} (value {value})")]
    NonPositive {
        source_text: String,
        t: f64,
        value: f64,
    },

    #[error("non-finite integrand value at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("quadrature tolerance not reached after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    ToleranceNotReached {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("declared tail {declared} contradicts sampled behaviour (observed log-ratio {observed}, expected {expected})")]
    TailContradiction {
        declared: String,
        observed: f64,
        expected: f64,
    },

    #[error("improper integral undetermined: unknown tail, lower bound {lower_bound}")]
    UndeterminedTail { lower_bound: f64 },

    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    #[error("time {t} is at or beyond the blow-up time {blow_up}")]
    BeyondBlowUp { t: f64, blow_up: f64 },

    #[error("step budget of {0} steps exceeded")]
    BudgetExceeded(usize),

    #[error("overflow in reaction step near t = {t}")]
    ReactionOverflow { t: f64 },

    #[error("NaN detected at t = {t}")]
    NaN { t: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}
