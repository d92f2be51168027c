use thiserror::Error;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("invalid constitutive law: {0}")]
    InvalidConstitutive(String),

    #[error("vacuum state: {0}")]
    Vacuum(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver abort: {0}")]
    SolverAbort(String),

    #[error("Newton iteration did not converge within {iters} iterations (residual {residual:e})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("entropy residual certification failed: {0}")]
    Certification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RelaxError {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            RelaxError::Config(_) | RelaxError::InvalidConstitutive(_) => 2,
            RelaxError::Certification(_) => 4,
            RelaxError::Io(_) => 5,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, RelaxError>;
