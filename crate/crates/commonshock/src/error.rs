//! Error types shared across the crate.
//!
//! Each subsystem has its own enum so that callers can match on the failure
//! class they care about; conversions flow upward (model → solver → PDE/sim →
//! CLI) via `#[from]`.

use thiserror::Error;

/// Errors raised while constructing, validating, or evaluating a model.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    /// A structural invariant of the configuration is violated.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A time argument fell outside the horizon `[0, T]`.
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// An exponential moment E[Zᵏ e^{cZ}] diverges for the requested tilt.
    ///
    /// Raised for unbounded claim support when c ≥ rate. Never reported as a
    /// silent infinity.
    #[error("divergent exponential moment E[Z^{order} e^(c Z)]: tilt c = {tilt} >= rate {rate}")]
    DivergentMoment { tilt: f64, rate: f64, order: u8 },

    /// A mathematically finite exponential moment exceeded the f64 range.
    #[error("exponential moment E[Z^{order} e^(c Z)] overflows f64 at tilt c = {tilt}")]
    MomentOverflow { tilt: f64, order: u8 },

    /// Deserialized JSON was syntactically valid but semantically unusable.
    #[error("config parse error: {0}")]
    Parse(String),
}

/// Errors raised by the one-dimensional root solvers and strategy ops.
#[derive(Debug, Clone, Error)]
pub enum SolveError {
    /// No sign change could be bracketed after the allowed expansions.
    #[error("bracket failure solving {context}: no sign change in [{lo}, {hi}] after {expansions} expansions")]
    BracketFailure {
        context: String,
        lo: f64,
        hi: f64,
        expansions: u32,
    },

    /// The iteration did not reach the residual tolerance.
    #[error("no convergence solving {context}: residual {residual} after {iterations} iterations")]
    NonConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },

    /// The operation requires a model feature the config does not have.
    #[error("unsupported model for this operation: {0}")]
    Unsupported(String),

    /// An underlying model evaluation failed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the PDE solver and value-function assembly.
#[derive(Debug, Clone, Error)]
pub enum PdeError {
    /// A solver precondition (ellipticity, grid sanity, spans) fails.
    #[error("PDE precondition violated: {0}")]
    Precondition(String),

    /// The computed solution lost positivity, so e^{∫g} representation broke.
    #[error("positivity violated in PDE solution: min value {min_value} at t = {t}, y = {y}")]
    PositivityViolation { min_value: f64, t: f64, y: f64 },

    /// A query point fell outside the tabulated grid.
    #[error("query ({t}, {y}) outside PDE grid domain [{t_min}, {t_max}] x [{y_min}, {y_max}]")]
    OutOfDomain {
        t: f64,
        y: f64,
        t_min: f64,
        t_max: f64,
        y_min: f64,
        y_max: f64,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Errors raised by the Monte Carlo simulator.
#[derive(Debug, Clone, Error)]
pub enum SimError {
    /// The simulation setup is unusable (zero paths, odd antithetic count, …).
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    /// Thinning found λ(t, Y_t) above its dominating bound δ(t).
    #[error("intensity dominance violated on line {line}: lambda({t}, {factor}) = {intensity} > delta({t}) = {bound}")]
    DominanceViolation {
        line: &'static str,
        t: f64,
        factor: f64,
        intensity: f64,
        bound: f64,
    },

    /// A simulated asset price left the positive half-line.
    #[error("asset price lost positivity at t = {t}: jump factor {factor}")]
    PriceNotPositive { t: f64, factor: f64 },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Errors surfaced by the experiment runner; the binary maps these to
/// process exit codes (validation → 2, numerical → 3, property → 4).
#[derive(Debug, Error)]
pub enum CliError {
    /// Spec or model validation failed; the report body is included.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A solver, PDE, or simulation stage failed numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A `verify` run found acceptance-property violations.
    #[error("property violations:\n{0}")]
    PropertyViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) | CliError::Json(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::PropertyViolation(_) => 4,
        }
    }
}
