use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fields live on different grids")]
    GridMismatch,

    // initial-data validation
    #[error("initial density has mean defect {defect:e} (tolerance {tolerance:e})")]
    MeanDefect { defect: f64, tolerance: f64 },
    #[error("initial density range [{min}, {max}] not strictly inside ({lower}, {upper})")]
    RangeViolation { min: f64, max: f64, lower: f64, upper: f64 },
    #[error("non-finite value encountered{0}")]
    NonFinite(String),

    // Keller-Segel map
    #[error("operation requires a periodic (torus) grid")]
    NotTorus,
    #[error("operation requires a line grid")]
    NotLine,
    #[error("total mass defect {defect:e} exceeds tolerance {tolerance:e}")]
    NonzeroTotalMass { defect: f64, tolerance: f64 },

    // time stepping
    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("density left the admissible window [{lower}, {upper}]: min {min}, max {max} at tau = {tau}")]
    RangeBreach {
        min: f64,
        max: f64,
        lower: f64,
        upper: f64,
        tau: f64,
    },
    #[error("density {min_sigma:e} too close to vacuum for the Eulerian solver at tau = {tau}")]
    VacuumApproach { min_sigma: f64, tau: f64 },
    #[error("sample times must be non-negative and non-decreasing")]
    BadSampleTimes,

    // characteristics
    #[error("profile has no vacuum interval")]
    NoVacuum,
    #[error("profile has {0} vacuum intervals; query them one at a time")]
    MultipleVacuumIntervals(usize),
    #[error("derivative order {k} is not supported on non-vacuum labels")]
    UnsupportedOrder { k: u32 },
    #[error("vacuum label {x} does not satisfy the vanishing-derivative condition for order {k}")]
    PreconditionViolation { x: f64, k: u32 },
    #[error("trajectory map is not monotone near y = {0}")]
    InversionFailure(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    // spectrum
    #[error("epsilon = 0 with alpha = 0 leaves the pressure coefficient undefined")]
    DegenerateEpsilon,
    #[error("|1 + eps^2 lambda| = {0:e} is resonant")]
    ResonantDenominator(f64),
    #[error("wavenumber must be positive for the velocity eigencomponent")]
    ZeroWavenumber,

    // diagnostics
    #[error("need at least {needed} samples in the fit window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("fit series contains a non-positive sample at tau = {0}")]
    NonPositiveSample(f64),

    // harness
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Whether the error reports a solver breaking down on admissible input,
    /// as opposed to rejected input.
    pub fn is_breakdown(&self) -> bool {
        matches!(
            self,
            Error::CflViolation { .. }
                | Error::RangeBreach { .. }
                | Error::VacuumApproach { .. }
                | Error::NonFinite(_)
                | Error::InversionFailure(_)
                | Error::ResonantDenominator(_)
        )
    }
}
