use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("potential is not convex at node {index} (second difference {value:.3e})")]
    NonConvex { index: usize, value: f64 },

    #[error("potential has a non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("radial slopes leave (0, 1) at node {index} (slope {slope:.6})")]
    SlopeOutOfRange { index: usize, slope: f64 },

    #[error("window {window} too small: captured moment mass {captured:.3e} of 1")]
    WindowTooSmall { window: f64, captured: f64 },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("grids do not match ({left} vs {right} intervals); resample first")]
    GridMismatch { left: usize, right: usize },

    #[error("path needs at least {needed} t-nodes, has {found}")]
    PathTooShort { needed: usize, found: usize },

    #[error("operation requires a {expected} path, got {found}")]
    WrongPathKind { expected: String, found: String },

    #[error("Hessian not positive semidefinite at (t={t:.4}, s={s:.4}): min eigenvalue {min_eig:.3e}")]
    NotPsd { t: f64, s: f64, min_eig: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("measure charges node {index} where the reference vanishes")]
    NotAbsolutelyContinuous { index: usize },

    #[error("quadrature did not converge for exponent j={j} at t-index {t_index} (error {error:.3e})")]
    Quadrature {
        j: usize,
        t_index: usize,
        error: f64,
    },

    #[error("radial weight is not subharmonic at radius node {index}")]
    NotSubharmonic { index: usize },

    #[error("density ratio unbounded: measured C = {measured:.3e}")]
    UnboundedRatio { measured: f64 },

    #[error("right-hand side violates compatibility: pairing with {against} is {pairing:.3e}")]
    Incompatible { against: String, pairing: f64 },

    #[error("descent did not converge in {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
