use thiserror::Error;

/// Errors raised by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field size {got} does not match grid size {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("negative power {0} requested on a field with a nonzero constant mode")]
    ConstantModeNotInvertible(f64),

    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),

    #[error("time step {dt} exceeds the Lipschitz guard 1/(2 L_g) = {limit}")]
    GuardViolation { dt: f64, limit: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in field at step {step}")]
    NonFinite { step: usize },

    #[error("norm {norm:e} exceeded overflow guard at step {step}")]
    Overflow { step: usize, norm: f64 },

    #[error("time {t} outside trajectory horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("trajectory is not stored at full resolution (stride {0})")]
    NotFullResolution(usize),

    #[error("snapshot grids are not nested: {0}")]
    NonNested(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
