use alloc::string::String;

/// Errors raised by grid construction, configuration checks and the engines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A size that must be a power of two (and at least 8) is not.
    #[error("{axis} size {size} must be a power of two >= 8")]
    GridSize { axis: &'static str, size: usize },

    /// A lower bound is not strictly below its upper bound.
    #[error("{axis} bounds are inverted or empty: [{min}, {max})")]
    InvertedBounds { axis: &'static str, min: f64, max: f64 },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The grid cannot resolve a quantum cell: dx·dp > ħ.
    #[error("resolvability violated: dx*dp = {cell} exceeds hbar = {hbar}")]
    Resolvability { cell: f64, hbar: f64 },

    /// The time step breaks the advection guard on one of the axes.
    #[error("time step guard violated on {axis}: Courant number {courant} >= 1")]
    Courant { axis: &'static str, courant: f64 },

    /// An initial state does not fit into the grid.
    #[error("initial state too wide for the grid: {0}")]
    StateTooWide(String),

    /// Two objects were expected to live on the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A non-finite value appeared in a field or trajectory.
    #[error("numerical blow-up in {context} at step {step}")]
    NumericalBlowup { context: &'static str, step: u64 },

    /// The tangent vector left the floating-point range between
    /// renormalisations.
    #[error("tangent vector norm {norm:e} left the representable range at step {step}; renormalise more often")]
    TangentRange { norm: f64, step: u64 },

    /// Operation needs a non-empty input.
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
