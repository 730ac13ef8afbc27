use thiserror::Error;

/// Errors raised by the geometric kernels and the checks built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Wedge product whose degree would exceed the ambient dimension.
    #[error("degree overflow: {lhs} + {rhs} exceeds dimension {dim}")]
    DegreeOverflow { lhs: usize, rhs: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// The candidate bilinear form of a 3-form is not definite.
    #[error("3-form is not positive (bilinear form has smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("gram matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    /// dφ, d*φ are not reproduced by any torsion components.
    #[error("torsion reconstruction residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    InconsistentTorsion { residual: f64, tolerance: f64 },

    #[error("symbol maps do not compose to zero (|S_out S_in| = {defect:.3e})")]
    NotAComplex { defect: f64 },

    /// Poisson source with nonzero integral; `mismatch` is ∫ρ over the torus.
    #[error("Poisson source is obstructed: integral mismatch {mismatch:.6e}")]
    ObstructedSource { mismatch: f64 },

    /// The Bianchi budget cannot be met by abelian instanton data.
    #[error("unrealizable balance: {reason} (fibration integral {fibration:.6e}, bundle integral {bundle:.6e})")]
    Balance {
        reason: String,
        fibration: f64,
        bundle: f64,
    },

    #[error("scenario is not dualizable: t^2 * beta_{index} has non-integral periods")]
    NotDualizable { index: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
