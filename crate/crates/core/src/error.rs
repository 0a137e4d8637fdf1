use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants map one-to-one onto the failure modes of the individual
/// operations, so callers sweeping over parameters can record a per-point
/// failure and keep going.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no period-1 fixed point: kick {kick} is smaller than drift {drift}")]
    NoFixedPoint { kick: f64, drift: f64 },

    #[error("no island: |a_eps| = {a_eps} is not smaller than |k_eps| = {k_eps}")]
    NoIsland { a_eps: f64, k_eps: f64 },

    #[error("seed ({theta}, {j}) escapes within {steps} steps, it is not inside an island")]
    NotInIsland { theta: f64, j: f64, steps: usize },

    #[error("energy {energy} outside the admissible range [{lo}, {hi}]")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance {tol} (estimated error {err})")]
    QuadratureFailure { tol: f64, err: f64 },

    #[error("orbit is not periodic with period {period}: closure residual {residual}")]
    NotPeriodic { period: usize, residual: f64 },

    #[error("inconsistent resonance inputs: {0}")]
    InconsistentInputs(String),

    #[error("no commensurate value for drift {drift} and hbar {hbar} with n <= {n_max}")]
    NoCommensurateValue { drift: f64, hbar: f64, n_max: u32 },

    #[error("complex scaling needs hbar = 1/integer, got hbar = {hbar}")]
    UnsupportedPlanck { hbar: f64 },

    #[error("state centre lies outside the momentum grid")]
    OutOfGrid,

    #[error("probability at the grid boundary reached {probability:e} at step {step}")]
    GridOverflow { step: usize, probability: f64 },

    #[error("non-positive probability {value} at t = {t}")]
    NonPositiveProbability { t: usize, value: f64 },

    #[error("eigensolver failed to converge on matrix {hash}")]
    ConvergenceFailure { hash: String },

    #[error("no candidate states to select from")]
    EmptyCandidates,

    #[error("ladder is empty (L = {length})")]
    EmptyLadder { length: i64 },

    #[error("ladder spectrum is degenerate at index {index}")]
    DegenerateSpectrum { index: usize },

    #[error("unperturbed ladder gap vanishes at j = {j}")]
    DegenerateUnperturbed { j: i64 },

    #[error("ladder action {action} lies outside the island (max {max})")]
    ActionOutsideIsland { action: f64, max: f64 },

    #[error("curves share no grid points")]
    NoCommonPoints,

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A failure recorded by an earlier run and read back from the cache.
    #[error("{0}")]
    Recorded(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
