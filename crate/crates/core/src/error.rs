use thiserror::Error;

/// Errors produced by the coverage library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge: achieved error {achieved:e}, requested {requested:e} \
         after {intervals} intervals"
    )]
    Quadrature {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    /// The Laplace evaluator handed to an analytic routine does not describe the model.
    #[error("laplace evaluator does not match model: {0}")]
    EvaluatorMismatch(String),

    /// Experiment configuration problem, tagged with the offending key.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Monte Carlo sampling could not produce a valid realization.
    #[error("simulation error: {0}")]
    Simulation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
