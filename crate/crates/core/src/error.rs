use thiserror::Error;

/// Errors raised across the certification toolkit.
#[derive(Debug, Error)]
pub enum PamError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("ket is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("Bloch vector length {0} exceeds 1")]
    BlochTooLong(f64),
    #[error("measurement direction must be a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("purity required: state {index} has Bloch length {norm}")]
    PurityRequired { index: usize, norm: f64 },
    #[error("angles ({0}, {1}, {2}) cannot be realised by three unit vectors")]
    InfeasibleAngles(f64, f64, f64),
    #[error("angle {0} outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("enumeration too large: {count} strategies exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
    #[error("invalid shot configuration: {0}")]
    InvalidShotConfig(String),
    #[error("no count records")]
    EmptyCounts,
    #[error("invalid count records: {0}")]
    InvalidCounts(String),
    #[error("resolution must be at least 2 (got {0})")]
    InvalidResolution(usize),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown witness `{0}`")]
    UnknownWitness(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PamError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PamError::EnumerationTooLarge { .. } => 3,
            PamError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, PamError>;
