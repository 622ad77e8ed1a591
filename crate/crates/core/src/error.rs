use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("triangle {cell} is not acute (largest angle {angle_deg:.4} deg)")]
    NotAcute { cell: usize, angle_deg: f64 },

    #[error("mesh is not admissible: {} offending face(s), first {:?}", faces.len(), faces.first())]
    AdmissibilityViolation { faces: Vec<usize> },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("field length {got} does not match mesh size {expected}")]
    MeshMismatch { expected: usize, got: usize },

    #[error("harmonic reconstruction of a negative density ({value:e} in cell {cell})")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("harmonic differential undefined at zero density (cell {cell})")]
    ZeroDensity { cell: usize },

    #[error("operation not available for the harmonic reconstruction")]
    UnsupportedKind,

    #[error("boundary densities carry different masses ({0:e} vs {1:e})")]
    MassMismatch(f64, f64),

    #[error("singular Newton system: {0}")]
    SingularSystem(String),

    #[error("step to the boundary {alpha:e} is below alpha_min")]
    StepTooSmall { alpha: f64 },

    #[error("Newton iteration failed at mu = {mu:e} after {iterations} step(s) (residual {residual:e})")]
    InnerFailure {
        mu: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("barrier continuation stopped after {iterations} outer iteration(s) at mu = {mu:e}")]
    MaxOuterIterations { iterations: usize, mu: f64 },
}
