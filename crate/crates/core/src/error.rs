use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("fixed-point iteration is not contracting (observed factor {factor:.3e} after {iterations} iterations)")]
    NonContraction { factor: f64, iterations: usize },

    #[error("fixed-point iteration exceeded {max_iter} iterations (residual {residual:.3e})")]
    MaxIterations { max_iter: usize, residual: f64 },

    #[error("input has too much energy outside the converged spectral range (relative tail {tail:.3e})")]
    TailEnergy { tail: f64 },

    #[error("spectral window [{lo}, {hi}) is not inside the converged range (limit {limit})")]
    WindowNotConverged { lo: f64, hi: f64, limit: f64 },

    #[error("time quadrature did not settle below relative tolerance {tol:.1e} within {nodes} nodes (last change {change:.3e})")]
    QuadratureNotConverged { nodes: usize, tol: f64, change: f64 },

    #[error("solution diverged (NaN or overflow) at t = {t}")]
    Diverged { t: f64 },

    #[error("re-projection to the spectral band lost {loss:.3e} relative mass in one step (limit {limit:.1e})")]
    ReprojectionLoss { loss: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed dump: {0}")]
    MalformedDump(String),
}
