use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed volume file {path}: {reason}")]
    MalformedVolume { path: String, reason: String },
    #[error("volume invariant violated: {0}")]
    InvalidVolume(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("mask is empty")]
    EmptyMask,
    #[error("tumor extent exceeds patch dims {patch_dims:?}: {detail}")]
    TumorExceedsPatch {
        patch_dims: [usize; 3],
        detail: String,
    },
    #[error("empty ROI")]
    EmptyRoi,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("labels contain a single class")]
    SingleClass,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("cross-validation: {0}")]
    CrossValidation(String),
    #[error("feature matrix: {0}")]
    FeatureMatrix(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("autodiff: {0}")]
    Autodiff(#[from] voxrad_autodiff::AdError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}
