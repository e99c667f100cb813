//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPd(String),

    /// Iterative eigensolver did not converge within its sweep cap.
    #[error("eigendecomposition failed to converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    /// All observations identical; the variance estimate degenerates to zero.
    #[error("degenerate sample: all observations identical")]
    DegenerateSample,

    /// Design matrix with linearly dependent columns.
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    /// Covariates all equal; the slope is unidentifiable.
    #[error("degenerate design: all covariate values equal")]
    DegenerateDesign,

    /// An observation sits on the boundary of the support.
    #[error("observation outside the open support: {0}")]
    NonInterior(String),

    /// Newton iteration exhausted its budget.
    #[error("solver did not converge after {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    /// Too few Monte Carlo replicates satisfied the conditioning event.
    #[error("conditioning starved: kept {kept} replicates, need at least {min_kept}")]
    ConditioningStarved { kept: usize, min_kept: usize },

    /// The model does not expose a bounded support radius.
    #[error("model `{0}` has no bounded support radius")]
    MissingSupportRadius(String),

    /// The model does not expose constant third-derivative envelopes.
    #[error("model `{0}` has no constant third-derivative envelopes")]
    MissingEnvelopeConstants(String),

    /// The quadratic coefficient is non-positive; no positive root exists.
    #[error("non-admissible: omega = {omega} <= 0")]
    NonAdmissible { omega: f64 },

    /// Sample size below the certification gate.
    #[error("sample size gate failed: n = {n} < n_min = {n_min}")]
    GateFailed { n: u64, n_min: u64 },

    /// Fisher information determinant non-positive.
    #[error("Fisher information is not positive definite (delta_I = {delta_i})")]
    NonPdFisher { delta_i: f64 },

    /// MLE failures exceeded the tolerated fraction of replicates.
    #[error("too many rejected replicates: {rejected} of {reps}")]
    TooManyRejections { rejected: usize, reps: usize },

    /// No probability mass inside the conditioning event.
    #[error("conditioning event has zero probability mass")]
    EmptyConditioningEvent,

    /// Rate fitting requires strictly positive values.
    #[error("non-positive value at index {index}: {value}")]
    NonPositiveValue { index: usize, value: f64 },

    /// Configuration file problem, with location information.
    #[error("config error (line {line}, field `{field}`): {message}")]
    InvalidConfig {
        line: usize,
        field: String,
        message: String,
    },

    #[error("unknown model `{got}`; registered models: {registered}")]
    UnknownModel { got: String, registered: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
