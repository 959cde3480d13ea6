use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("initial displacement u0 is identically zero")]
    AllZeroInitialData,
    #[error("dimension mismatch: expected {expected} coefficients, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalue #{index} is not positive ({value})")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("eigenvalues must be sorted nondecreasing (index {index})")]
    UnsortedSpectrum { index: usize },
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("exponent gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid band: mu ({mu}) must exceed nu ({nu})")]
    InvalidBand { nu: f64, mu: f64 },
    #[error("vector has nonzero entries below the band floor nu = {nu}")]
    SupportBelowNu { nu: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step size underflow at t = {t}: dt = {dt} is below dt_min")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("blowup detected at t = {t}: |A^1/2 u|^2 grew to {ratio} times its initial value")]
    BlowupDetected { t: f64, ratio: f64 },
    #[error("reference integrator could not meet tolerance at t = {t}")]
    ToleranceNotMet { t: f64 },
    #[error("degenerate trace: coefficient b vanishes at sample {index} with nonzero state")]
    DegenerateTrace { index: usize },
    /// Counts are samples for window checks and whole decades for horizon checks.
    #[error("insufficient tail: {available} available, {required} required")]
    InsufficientTail { available: usize, required: usize },
}
