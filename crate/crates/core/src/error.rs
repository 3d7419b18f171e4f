use thiserror::Error;

/// Errors from gauge/grid construction and ring-level preconditions.
#[derive(Debug, Clone, Error)]
pub enum RingError {
    #[error("custom gauge is not decreasing on the grid: rho({eps_hi}) = {rho_hi} <= rho({eps_lo}) = {rho_lo}")]
    NonMonotoneGauge {
        eps_hi: f64,
        eps_lo: f64,
        rho_hi: f64,
        rho_lo: f64,
    },
    #[error("gauge value {rho} at eps = {eps} outside (0, 1]")]
    GaugeOutOfRange { eps: f64, rho: f64 },
    #[error("grid must be strictly decreasing and inside (0, 1]; offending sample index {index}")]
    BadGrid { index: usize },
    #[error("grid needs at least {min} samples for asymptotic fits, got {got}")]
    GridTooShort { min: usize, got: usize },
    #[error("operands live on different grids or gauges")]
    CtxMismatch,
    #[error("division by a non-invertible generalized number")]
    NotInvertible,
}

/// Evaluation failure of a generalized smooth function, naming the eps.
#[derive(Debug, Clone, Error)]
#[error("evaluation failed at eps = {eps} (grid index {index}): {reason}")]
pub struct EvalError {
    pub index: usize,
    pub eps: f64,
    pub reason: String,
}

/// Quadrature non-convergence, naming the eps and subinterval.
#[derive(Debug, Clone, Error)]
#[error("quadrature did not converge at eps = {eps} on [{a}, {b}] (error estimate {err_est:e}, requested {tol:e})")]
pub struct QuadError {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub err_est: f64,
    pub tol: f64,
}

/// Construction-time property violation (mollifier build, embeddings).
#[derive(Debug, Clone, Error)]
pub enum BuildError {
    #[error("mollifier property violated at build time: {property} (residual {residual:e}, tolerance {tol:e})")]
    MollifierProperty {
        property: String,
        residual: f64,
        tol: f64,
    },
    #[error("embedding parameter b is not an infinite positive number ({detail})")]
    BNotInfinite { detail: String },
    #[error("sample table for embed_function would need {needed} points at eps = {eps} (cap {cap}); raise the grid floor or choose a smaller b exponent")]
    InsufficientDensity { eps: f64, needed: usize, cap: usize },
    #[error("{0}")]
    Other(String),
}

/// ODE/root solver failures.
#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("step budget {budget} exhausted at eps = {eps} (t = {t})")]
    StepBudget { eps: f64, t: f64, budget: u64 },
    #[error("step size underflow at eps = {eps} (t = {t}, h = {h:e})")]
    StepUnderflow { eps: f64, t: f64, h: f64 },
    #[error("Picard iteration diverged at eps = {eps}: sup-norm grew for {count} consecutive iterations")]
    PicardDiverged { eps: f64, count: usize },
    #[error("bisection bracket violated at eps = {eps}: f(a) - y = {fa}, f(b) - y = {fb}")]
    BracketViolation { eps: f64, fa: f64, fb: f64 },
    #[error("linear ODE hypothesis |int A| <= -C log drho failed (ratio {ratio} at eps = {eps})")]
    LogHypothesis { eps: f64, ratio: f64 },
    #[error("non-commuting coefficient family; closed form not applicable")]
    NonCommuting,
    #[error("evaluation failure inside solver: {0}")]
    Eval(#[from] EvalError),
    #[error("quadrature failure inside solver: {0}")]
    Quad(#[from] QuadError),
}

/// Scenario/CLI configuration problems, naming the key path.
#[derive(Debug, Clone, Error)]
#[error("config error at `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}
