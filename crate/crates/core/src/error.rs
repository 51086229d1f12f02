use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Adaptive integrator step size shrank below machine resolution of the
    /// time axis. Carries the time and state for diagnosis.
    #[error("step size underflow at t = {t}: state = {state:?}")]
    StepSizeUnderflow { t: f64, state: [f64; 4] },

    #[error("integration diverged at t = {t}: non-finite state")]
    Diverged { t: f64 },

    /// Discrete noise resonances are undefined for a zero noise frequency.
    #[error("no discrete resonances: noise frequency must be positive")]
    NoResonances,

    #[error("scan point ({axis1}, {axis2}) failed: {source}")]
    ScanPoint {
        axis1: f64,
        axis2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("phase sample phi = {phi} failed: {source}")]
    PhaseSample {
        phi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("peak spacing needs at least 2 local maxima, found {found}")]
    TooFewPeaks { found: usize },

    #[error("tolerance curve too small: {0}")]
    DegenerateCurve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
