use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The admissibility and stability variants are the "domain" failures: the
/// computation ran, but the pair is outside the regime where the index is
/// defined. The CLI maps those to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OmegaError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    NonHermitianInput { residual: f64, tolerance: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.3e} below floor {floor:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("eigensolver did not converge")]
    ConvergenceFailure,

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    ConfigParse(String),

    #[error("cut {cut} exceeds the interior limit {limit}")]
    CutTooLarge { cut: usize, limit: usize },

    #[error("no pinned default orientation; run calibration or pass an explicit orientation")]
    CalibrationMissing,

    #[error("commuting pair is not admissible: epsilon {epsilon:.6} gives defect bound {bound:.6} >= 1/4; rescale the pair")]
    InadmissibleCommutator { epsilon: f64, bound: f64 },

    #[error("index differs across cuts: {detail}")]
    UnstableCount { detail: String },

    #[error("eigenvalue within {gap:.3e} of 1/2 at cut {cut} (gap floor {floor})")]
    GapViolation { cut: usize, gap: f64, floor: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl OmegaError {
    /// Stable identifier used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            OmegaError::DimensionMismatch(_) => "DimensionMismatch",
            OmegaError::NonHermitianInput { .. } => "NonHermitianInput",
            OmegaError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            OmegaError::ConvergenceFailure => "ConvergenceFailure",
            OmegaError::NonFinite { .. } => "NonFinite",
            OmegaError::InvalidParameter(_) => "InvalidParameter",
            OmegaError::ConfigParse(_) => "ConfigParse",
            OmegaError::CutTooLarge { .. } => "CutTooLarge",
            OmegaError::CalibrationMissing => "CalibrationMissing",
            OmegaError::InadmissibleCommutator { .. } => "InadmissibleCommutator",
            OmegaError::UnstableCount { .. } => "UnstableCount",
            OmegaError::GapViolation { .. } => "GapViolation",
            OmegaError::Io(_) => "Io",
        }
    }

    /// True for failures that mean "index undefined for this input" rather
    /// than bad usage.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            OmegaError::InadmissibleCommutator { .. }
                | OmegaError::UnstableCount { .. }
                | OmegaError::GapViolation { .. }
        )
    }
}

impl From<std::io::Error> for OmegaError {
    fn from(e: std::io::Error) -> Self {
        OmegaError::Io(e.to_string())
    }
}

pub type Result<T, E = OmegaError> = std::result::Result<T, E>;
