use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, TodaError>;

#[derive(Debug, Error, Clone)]
pub enum TodaError {
    #[error("Gamma function pole at z = {0}")]
    PoleOfGamma(Complex64),

    #[error("integration path from 0 to {0} passes through a pole or branch cut of log Gamma")]
    PathThroughPole(Complex64),

    #[error("insufficient decay: tail estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    InsufficientDecay { estimate: f64, tol: f64 },

    #[error("polynomial has a vanishing leading coefficient")]
    DegenerateLeading,

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("Newton iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        last: Vec<Complex64>,
        history: Vec<f64>,
    },

    #[error("singular Jacobian at iterate {0:?}")]
    SingularJacobian(Vec<Complex64>),

    #[error("{what}: point {point} lies within {distance:.2e} of a pole")]
    PoleProximity {
        what: &'static str,
        point: Complex64,
        distance: f64,
    },

    #[error("non-convergence in {what}: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("collision: {0}")]
    Collision(String),

    #[error("point {0} is within 1e-6 of the integration contour of the Cauchy kernel")]
    ContourProximity(Complex64),

    #[error("branch jump of log zeta by {0:.3} between iterates")]
    BranchJump(f64),

    #[error("argument {arg:.4} lies outside the sector |arg w| < {limit:.4}")]
    Sector { arg: f64, limit: f64 },

    #[error("overflow guard: {0}")]
    Overflow(String),

    #[error("residue cancellation failed at {point}: mismatch {mismatch:.3e}")]
    ResidueCancellation { point: Complex64, mismatch: f64 },

    #[error("series window insufficient: {0}")]
    Window(String),

    #[error("invalid parameters: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl TodaError {
    pub fn non_convergence(what: &'static str, detail: impl Into<String>) -> Self {
        TodaError::NonConvergence {
            what,
            detail: detail.into(),
        }
    }

    /// Whether the error stems from bad input rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(self, TodaError::Config(_) | TodaError::Io(_))
    }
}
