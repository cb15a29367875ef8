use thiserror::Error;

/// Errors raised by the numerical pipeline and the file formats around it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("degenerate boundary parameterization at t = {t} (|x'(t)| = {speed:e})")]
    DegenerateBoundary { t: f64, speed: f64 },
    #[error("quadrature too coarse: {n_quad} nodes given, at least {required} (even) needed")]
    QuadratureTooCoarse { n_quad: usize, required: usize },
    #[error("singular system: pivot {pivot:e} below tolerance {tolerance:e}")]
    SingularSystem { pivot: f64, tolerance: f64 },
    #[error("rank deficient Jacobian: sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Tikhonov normal matrix is not positive definite")]
    NotSpd,
    #[error("radial function lost positivity at frequency index {freq_index}, iteration {iteration} (min r = {min_radius:e})")]
    PositivityLoss {
        freq_index: usize,
        iteration: usize,
        min_radius: f64,
    },
    #[error("initial guess failed: best residual {residual:e} exceeds {limit:e}")]
    InitFailure { residual: f64, limit: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 4,
            Error::Json(_) | Error::Config(_) => 2,
            Error::Domain(_) | Error::InvalidShape(_) | Error::DimensionMismatch { .. } => 2,
            _ => 3,
        }
    }
}
