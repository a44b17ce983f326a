use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible marker packing: {0}")]
    InfeasiblePacking(String),
    #[error("invalid pitch: {0}")]
    Pitch(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("contact lies entirely outside the sensing area")]
    PoseOutOfArea,
    #[error("renderer for {renderer} cannot handle mechanism {mechanism}")]
    MechanismMismatch {
        renderer: &'static str,
        mechanism: String,
    },
    #[error("total internal reflection: sin(theta)/n_ratio = {0:.6} > 1")]
    TotalInternalReflection(f64),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("cardinality mismatch: {0} reference vs {1} current markers")]
    Cardinality(usize, usize),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("insufficient training data: {0}")]
    InsufficientData(String),
    #[error("capacity {capacity} out of range 1..={max}")]
    Capacity { capacity: usize, max: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
