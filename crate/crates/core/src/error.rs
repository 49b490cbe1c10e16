use thiserror::Error;

/// Errors raised by the numerical kernels, the cone calculus and the
/// theorem harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal mass {off_norm:e})")]
    SvdNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("NNLS exceeded {iterations} iterations (best residual {best_residual:e})")]
    NnlsIterationCap {
        iterations: usize,
        best_residual: f64,
        best_coeffs: Vec<f64>,
    },

    #[error("double description in dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("unsupported cone conversion: {0}")]
    UnsupportedConversion(String),

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("invalid tolerance policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid instance specification: {0}")]
    InvalidSpec(String),

    #[error("Moore-Penrose axiom {axiom} violated (residual {residual:e} > {bound:e})")]
    AxiomViolation {
        axiom: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("hypothesis T†T K ⊆ K fails at generator {generator} (slack {slack:e})")]
    HypothesisFailed {
        generator: usize,
        image: Vec<f64>,
        slack: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
