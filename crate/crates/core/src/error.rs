use thiserror::Error;

/// Every failure the library can report. Numerical failures and configuration
/// failures are kept apart so the command-line driver can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sector N={particles}, M={sites} has dimension {dimension}, above the cap {cap}")]
    DimensionCap {
        particles: usize,
        sites: usize,
        dimension: u128,
        cap: usize,
    },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("state {state} is not in the basis: {reason}")]
    NotInBasis { state: String, reason: String },

    #[error("site {site} out of range for a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not hermitian (max |A - A^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("direction vector is not admissible: lambda_max = {lambda_max:.6} > 1")]
    InadmissibleDirection { lambda_max: f64 },

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("lattice depth {depth} outside the parameter table range [{min}, {max}]")]
    OutOfTable { depth: f64, min: f64, max: f64 },

    #[error("gauge check failed: relative imaginary residual {0:.3e}")]
    Gauge(f64),

    #[error("quasimomentum {q} is not on the lattice grid 2k/M")]
    OffGrid { q: f64 },

    #[error("non-finite amplitude encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("norm drift {drift:.3e} at t = {time} exceeds {tolerance:.1e}; reduce the time step")]
    NormDrift {
        drift: f64,
        time: f64,
        tolerance: f64,
    },

    #[error(
        "time step {dt} too large: dt * |H| = {product:.3} exceeds {limit}; \
         the norm drift would exceed tolerance"
    )]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("oracle mismatch: |c{index}|^2 deviates by {deviation:.3e} at t = {time}")]
    OracleMismatch {
        index: usize,
        time: f64,
        deviation: f64,
    },

    #[error("audit `{check}` failed: value {value:.6e} exceeds bound {bound:.6e} (seed {seed})")]
    AuditViolation {
        check: String,
        value: f64,
        bound: f64,
        seed: u64,
    },

    #[error("occupancy violation: {0}")]
    Occupancy(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the user's configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidSector(_)
                | Error::InvalidParameter(_)
                | Error::DimensionCap { .. }
                | Error::InadmissibleDirection { .. }
                | Error::OutOfTable { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
