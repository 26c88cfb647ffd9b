use thiserror::Error;

/// Errors produced by the analysis and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate fold: {coefficient} = {value:e} is below the fold floor")]
    DegenerateFold {
        coefficient: &'static str,
        value: f64,
    },

    #[error("coefficient {coefficient} is not finite")]
    NonFinite { coefficient: &'static str },

    #[error("system is not reversible (requires c_xy = -c_yx and c_x = -c_y)")]
    NotReversible,

    #[error("two-fold is not elliptic (requires c_x < 0 and c_y > 0)")]
    NotElliptic,

    #[error("orbit does not close: closure error {closure_error:e}")]
    NotClosed { closure_error: f64 },

    #[error("iteration count must be at least 1")]
    ZeroIterations,

    #[error("integrator exceeded {max_events} events")]
    MaxEventsExceeded { max_events: usize },

    #[error("step too coarse near t = {t}: two switching events fall inside one step")]
    StepTooCoarse { t: f64 },

    #[error("no return to the switching plane within t = {max_time}")]
    NoReturn { max_time: f64 },

    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),

    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
