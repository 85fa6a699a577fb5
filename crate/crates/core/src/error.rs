use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n must be ≥ 1")]
    EmptySegment,

    #[error("{what} needs at least {min} sites, got n = {n}")]
    TooFewSites {
        what: &'static str,
        min: usize,
        n: usize,
    },

    #[error("conductance c({edge},{next}) = {value} is not finite and strictly positive", next = edge + 1)]
    InvalidConductance { edge: usize, value: f64 },

    #[error("expected {expected} conductances for n = {n}, got {got}")]
    ConductanceCount { n: usize, expected: usize, got: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("zero variance: the Rayleigh quotient is undefined for constant functions")]
    ZeroVariance,

    #[error("mode {mode} out of range for n = {n} (expected 1 ≤ j ≤ n−1)")]
    ModeOutOfRange { mode: usize, n: usize },

    #[error(
        "bisection bracket failure for mode {mode}: at λ = {lambda:e} the terminal angle \
         θ = {theta} is below {mode}π"
    )]
    Bracket { mode: usize, lambda: f64, theta: f64 },

    #[error("bisection for mode {mode} did not reach tolerance after {iterations} iterations (bracket [{lo:e}, {hi:e}])")]
    BisectionLimit {
        mode: usize,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    #[error("inverse iteration for eigenvalue {index} (λ = {lambda:e}) did not converge after {iterations} iterations")]
    InverseIteration {
        index: usize,
        lambda: f64,
        iterations: usize,
    },

    #[error("environment JSON: {0}")]
    Json(#[from] serde_json::Error),
}
