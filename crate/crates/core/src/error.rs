use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate cloud: {0}")]
    DegenerateCloud(String),

    #[error("invalid cloud: {0}")]
    InvalidCloud(String),

    #[error("no horizontal plane: best candidate has {best} inliers, {required} required")]
    NoHorizontalPlane { best: usize, required: usize },

    #[error("invalid RANSAC parameters: {0}")]
    InvalidRansacParams(String),

    #[error("zero privilege: level {0} releases nothing")]
    ZeroPrivilege(f64),

    #[error("invalid privilege level {0}: must lie in (0, 1]")]
    InvalidPrivilege(f64),

    #[error("epoch {epoch} not available for object {object_id}")]
    MissingEpoch { object_id: String, epoch: u32 },

    #[error("unknown object {0}")]
    UnknownObject(String),

    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("label {0} has no examples")]
    EmptyClass(u32),

    #[error("invalid label space: {0}")]
    InvalidLabels(String),

    #[error("attacker profile {0} has no epoch band")]
    NoEpochBand(String),

    #[error("attacker {0} is not trained")]
    AttackerNotTrained(String),

    #[error("invalid score distribution: {0}")]
    InvalidScores(String),

    #[error("degenerate curve: all utility values equal")]
    DegenerateCurve,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("object {object_id}: {source}")]
    Object {
        object_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateCloud(_) => "DegenerateCloud",
            Error::InvalidCloud(_) => "InvalidCloud",
            Error::NoHorizontalPlane { .. } => "NoHorizontalPlane",
            Error::InvalidRansacParams(_) => "InvalidRansacParams",
            Error::ZeroPrivilege(_) => "ZeroPrivilege",
            Error::InvalidPrivilege(_) => "InvalidPrivilege",
            Error::MissingEpoch { .. } => "MissingEpoch",
            Error::UnknownObject(_) => "UnknownObject",
            Error::Manifest { .. } => "Manifest",
            Error::EmptyClass(_) => "EmptyClass",
            Error::InvalidLabels(_) => "InvalidLabels",
            Error::NoEpochBand(_) => "NoEpochBand",
            Error::AttackerNotTrained(_) => "AttackerNotTrained",
            Error::InvalidScores(_) => "InvalidScores",
            Error::DegenerateCurve => "DegenerateCurve",
            Error::InvalidCurve(_) => "InvalidCurve",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Object { source, .. } | Error::Stage { source, .. } => source.kind(),
            Error::Io { .. } => "Io",
            Error::Json { .. } => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    pub fn for_object(self, object_id: &str) -> Self {
        Error::Object { object_id: object_id.into(), source: Box::new(self) }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }

    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
