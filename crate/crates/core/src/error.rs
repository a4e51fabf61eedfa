use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("layout has {0} modes; at most 64 are supported")]
    TooManyModes(usize),

    #[error("operator maps a basis state outside sector {sector}")]
    LeavesSector { sector: String },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix (norm {norm:.3e})")]
    NoConvergence { dim: usize, norm: f64 },

    #[error("reference energy ({re}, {im}) lies on the spectrum (theta = {theta:?})")]
    ReferenceOnSpectrum { re: f64, im: f64, theta: Option<f64> },

    #[error("winding unresolvable near theta = {theta}: phase step {step:.3} rad after maximum refinement")]
    WindingUnresolvable { theta: f64, step: f64 },

    #[error("flow is not periodic: accumulated phase {raw} is not a multiple of 2 pi")]
    NotPeriodic { raw: f64 },

    #[error("spin-parity constraint broken: |[s^z, h]| = {norm:.3e} at theta = {theta}")]
    SpinSymmetryBroken { norm: f64, theta: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a twist angle to errors that carry one.
    pub fn at_theta(self, theta: f64) -> Self {
        match self {
            Error::ReferenceOnSpectrum { re, im, theta: None } => Error::ReferenceOnSpectrum { re, im, theta: Some(theta) },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
