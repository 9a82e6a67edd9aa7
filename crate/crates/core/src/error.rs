use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {j} out of range 0..={n}")]
    IndexOutOfRange { j: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function is not differentiable at the requested point")]
    NotDifferentiable,

    #[error("function is not twice differentiable at the requested point")]
    NotTwiceDifferentiable,

    #[error("operation not supported for this function variant: {0}")]
    UnsupportedVariant(String),

    #[error("unsupported body: {0}")]
    UnsupportedBody(String),

    #[error("minimization did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("non-finite integrand value at node {at:?}")]
    NonFiniteIntegrand { at: Vec<f64> },

    #[error("density fails the {class} certification: {detail}")]
    ClassViolation { class: String, detail: String },

    #[error("independent routes disagree for {what}: {a:?} vs {b:?} (rel err {rel:.3e})")]
    RouteMismatch {
        what: String,
        a: Vec<f64>,
        b: Vec<f64>,
        rel: f64,
    },

    #[error("least-squares fit is ill-conditioned or underdetermined: {0}")]
    IllConditionedFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
