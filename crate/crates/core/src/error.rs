use thiserror::Error;

/// Errors shared by all modules of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("state vector is not normalized: norm {0}")]
    NotNormalized(f64),
    #[error("non-finite matrix or vector entry")]
    NonFinite,
    #[error("overlap magnitude {0:.3e} is too small for the analytic derivative")]
    SingularOverlap(f64),
    #[error("statistical distance {s:.6} lies outside the admissible band ({lo:.6}, {hi:.6})")]
    NearSingular { s: f64, lo: f64, hi: f64 },
    #[error("generator has zero variance in this state")]
    ZeroVariance,
    #[error("expectation value above the ground state is zero in this state")]
    ZeroEnergy,
    #[error("target distance {0} lies outside (0, pi]")]
    InvalidDistance(f64),
    #[error("extreme eigenvalues are degenerate: gap {0:.3e}")]
    DegenerateSpectrum(f64),
    #[error("invalid campaign spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
