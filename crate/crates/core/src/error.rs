use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Family parameters that are non-finite or have a non-positive scale.
    #[error("unbounded distribution parameter: {0}")]
    UnboundedParameter(String),

    #[error("probability vector is not a valid log-concave pmf: {0}")]
    InvalidPmf(String),

    /// One half of the grid carries no mass, so conditional half means are undefined.
    #[error("degenerate half: left mass {0} leaves one half of the grid empty")]
    DegenerateHalf(f64),

    #[error("interval [{lo}, {hi}) carries vanishing probability mass")]
    VanishingMass { lo: f64, hi: f64 },

    #[error("slope fit needs at least 4 points spanning 2 decades (got {points} points, {decades:.2} decades)")]
    InsufficientSpan { points: usize, decades: f64 },

    #[error("allocation infeasible: {0}")]
    InfeasibleAllocation(String),

    #[error("budget {budget} is below the minimum feasible cost {minimum}")]
    InfeasibleBudget { budget: u64, minimum: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
