use thiserror::Error;

/// Errors raised by model construction, calculus, criteria and constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite field value: {0}")]
    NonFinite(String),
    #[error("volume form is nearly degenerate: min |coefficient| = {min_abs:e}")]
    NearDegenerateVolume { min_abs: f64 },
    #[error("form is not a contact form of the required sign: {0}")]
    NonContact(String),
    #[error("Reeb kernel is not one-dimensional: {0}")]
    DegenerateKernel(String),
    #[error("forms are not eigenforms of the flow: residual {residual:e} exceeds {tolerance:e}")]
    NotEigen { residual: f64, tolerance: f64 },
    #[error("defining pair is not positively oriented: {0}")]
    NotOriented(String),
    #[error("form does not annihilate the flow direction: max |iota_X alpha| = {0:e}")]
    NotSupporting(f64),
    #[error("orientation mismatch: {0}")]
    OrientationMismatch(String),
    #[error("defining pair is not Anosov: {0}")]
    NotAnosov(String),
    #[error("defining pair is not volume preserving: max |r_u + r_s| = {0:e}")]
    NotVolumePreserving(f64),
    #[error("proportionality factor is not positive: min = {0:e}")]
    NonPositiveKappa(f64),
    #[error("two-form is not invariant under the flow: max residual {0:e}")]
    NotInvariant(f64),
    #[error("epsilon {epsilon} is outside (0, {bound}]")]
    EpsilonTooLarge { epsilon: f64, bound: f64 },
    #[error("pair is not linear-Liouville (margin {0:e})")]
    NotLinearLiouville(f64),
    #[error("pair is not Liouville (margin {0:e})")]
    NotLiouville(f64),
    #[error("expression error: {0}")]
    Expression(String),
    #[error("pair file error at line {line}: {message}")]
    PairFile { line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AlvError {
    fn from(e: std::io::Error) -> Self {
        AlvError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AlvError>;
