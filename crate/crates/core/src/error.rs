use thiserror::Error;

/// Errors raised anywhere in the damping pipeline.
///
/// The variants are grouped by [`ErrorKind`] so that the command-line driver
/// can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("photon sector unstable: -detuning + 2u = {0} must be positive")]
    UnstablePhotonSector(f64),

    #[error("mean-field solver did not converge at y = {y}: residual {residual:e} after {iterations} iterations")]
    NonConvergence { y: f64, iterations: usize, residual: f64 },

    #[error("pump y = {y} is within the critical window of y_crit = {y_crit}")]
    NearCritical { y: f64, y_crit: f64 },

    #[error("singular Jacobian at y = {y}")]
    SingularJacobian { y: f64 },

    #[error("normal phase requested above threshold: y = {y} >= y_crit = {y_crit}")]
    AboveThreshold { y: f64, y_crit: f64 },

    #[error("{sector}: spectrum is not real (max |Im w| = {max_imag:e})")]
    NonRealSpectrum { sector: String, max_imag: f64 },

    #[error("{sector}: defective or negative-norm spectrum: {detail}")]
    DefectiveSpectrum { sector: String, detail: String },

    #[error("symmetry violated for {what}: residual {residual:e}")]
    SymmetryViolation { what: String, residual: f64 },

    #[error("mode tracking ambiguous at {context}: best overlap {best_overlap:.3}")]
    AmbiguousMode { context: String, best_overlap: f64 },

    #[error("negative Landau radicand n1 - n2 = {value:e} at q = {q}")]
    NegativeRadicand { q: f64, value: f64 },

    #[error("self-energy pole collision at w = {omega} with zero phonon damping")]
    PoleCollision { omega: f64 },

    #[error("Green's function denominator vanishes on the grid at w = {omega}")]
    OnGridPole { omega: f64 },

    #[error("spectral sum rule violated: captured weight {captured}")]
    SumRuleDeficit { captured: f64 },

    #[error("continuation unstable at row {row}: growth factor {growth:e}")]
    ContinuationUnstable { row: usize, growth: f64 },

    #[error("pole search did not converge from seed {seed}")]
    PoleSearch { seed: num_complex::Complex64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Solver,
    Numerics,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::UnstablePhotonSector(_) => {
                ErrorKind::Config
            }
            Error::NonConvergence { .. }
            | Error::SingularJacobian { .. }
            | Error::AboveThreshold { .. }
            | Error::PoleSearch { .. }
            | Error::Io(_) => ErrorKind::Solver,
            _ => ErrorKind::Numerics,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
