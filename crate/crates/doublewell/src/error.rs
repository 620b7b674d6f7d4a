//! Crate-wide error type.

/// Errors produced by solvers, steppers and constructors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A potential that must be reflection symmetric is not.
    #[error("potential is not reflection symmetric: max asymmetry {max_asymmetry:.3e}")]
    AsymmetricPotential { max_asymmetry: f64 },

    /// Two quantities live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An iterative eigensolve ran out of iterations.
    #[error("eigensolver did not converge: {context} (residual {residual:.3e})")]
    Convergence { context: String, residual: f64 },

    /// The provided spectrum does not span the initial state.
    #[error("spectrum spans only {spanned:.12} of the initial state norm")]
    InsufficientSpan { spanned: f64 },

    /// The time stepper lost more norm than allowed.
    #[error("norm drift {drift:.3e} exceeds {limit:.1e} at t = {t:.6}")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    /// The product grid would exceed the configured cap.
    #[error("product grid cap exceeded: n = {n} > {cap}")]
    SizeCap { n: usize, cap: usize },

    /// A symmetry projection annihilated the state.
    #[error("symmetry projection annihilated the state (norm {norm:.3e})")]
    ZeroProjection { norm: f64 },

    /// Level labels a/b/c/d could not be assigned.
    #[error("level labeling ambiguous: {0}")]
    LabelingAmbiguity(String),

    /// A quadrature failed to reach its convergence target.
    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),

    /// Root bracketing failed during ramp calibration.
    #[error("calibration bracket failure: {0}")]
    BracketFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
