use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration domain too small: captured mass {captured:.3e} below 1 - {tol:.1e}")]
    DomainTooSmall { captured: f64, tol: f64 },

    #[error("model assumption violated: {0}")]
    Assumption(String),

    #[error("no exponential moment in this direction, assumption (A4) fails: {0}")]
    Divergence(String),

    #[error("stability failure at t = {t:.4}: overshoot {overshoot:.3e} exceeds {tol:.1e}; reduce dt")]
    Stability { t: f64, overshoot: f64, tol: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        drift: Vec<f64>,
    },

    #[error("level {level} is not crossed by the field")]
    NoFront { level: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("window error: {0}; enlarge the domain half-width")]
    Window(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
