use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("input mean {mean:e} exceeds tolerance {tol:e}; the antiderivative is only defined on mean-zero fields")]
    NonIntegrable { mean: f64, tol: f64 },

    #[error("p = {p} is outside the existence window for s = {s} (p_max = {p_max})")]
    OutsideExistenceWindow { s: f64, p: f64, p_max: f64 },

    #[error("ground-state iteration did not converge after {iters} iterations (last residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("model mismatch: expected {expected}, found {found}")]
    ModelMismatch { expected: String, found: String },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("right-hand side is not orthogonal to the kernel (overlap {overlap:e}, limit {limit:e})")]
    Fredholm { overlap: f64, limit: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("theory consistency failure: {0}")]
    Inconsistent(String),

    #[error("index mismatch: K_formula = {} but k_r + k_c + k_i_minus = {}", .0.k_formula, .0.k_direct)]
    IndexMismatch(Box<crate::verdicts::KreinIndexResult>),

    #[error("under-resolved: {0}")]
    Unresolved(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the formula/direct-count agreement.
    pub fn is_theory_failure(&self) -> bool {
        matches!(self.root(), Error::IndexMismatch(_) | Error::Inconsistent(_))
    }

    /// Strips stage labels and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
