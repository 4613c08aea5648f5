use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("wrong device flavor: operation needs {expected}, device is {got}")]
    WrongFlavor { expected: &'static str, got: &'static str },

    #[error("step size {dt:e} s exceeds the 1 ps limit")]
    StepSize { dt: f64 },

    #[error("calibration failed after {iterations} iterations (best residual {residual:.3e})")]
    CalibrationFailure { iterations: usize, residual: f64 },

    #[error("cell not readable: {0}")]
    NotReadable(String),

    #[error("singular network: {0}")]
    SingularNetwork(String),

    #[error("invalid current ordering: I_P = {i_p:e} A must exceed I_AP = {i_ap:e} A")]
    InvalidOrdering { i_p: f64, i_ap: f64 },

    #[error("sense mode input missing: {0}")]
    ModeInput(String),

    #[error("missing argument: {0}")]
    MissingArgument(String),

    #[error("write to row {row} failed on columns {columns:?}")]
    WriteFailure { row: usize, columns: Vec<usize> },

    #[error("invalid access: {0}")]
    InvalidAccess(String),

    #[error("inconsistent sense outputs at column {column}: AND and NOR both asserted")]
    InconsistentSense { column: usize },

    #[error("design {0} must be calibrated first")]
    CalibrationRequired(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("mixed calibration states: {0}")]
    MixedCalibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} is not finite ({value})")))
    }
}
