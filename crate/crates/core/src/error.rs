use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("local state on site {site} has norm {norm}, expected 1")]
    NonNormalizedLocal { site: usize, norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("region [{start}, {end}) is not a valid region of a {n_sites}-site chain")]
    RegionOutOfBounds {
        start: usize,
        end: usize,
        n_sites: usize,
    },

    #[error("site {site} out of bounds for a {n_sites}-site chain")]
    SiteOutOfBounds { site: usize, n_sites: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("energy width {width:e} is zero; the initial state is an eigenstate")]
    DegenerateWidth { width: f64 },

    #[error("only {found} occupied levels above the weight floor, need {required}")]
    TooFewOccupied { found: usize, required: usize },

    #[error("no correlation front: only {radii} radii crossed the threshold")]
    NoFrontDetected { radii: usize },

    #[error("validation failed:\n{}", .0.join("\n"))]
    ValidationFailed(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
