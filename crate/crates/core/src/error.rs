use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("domain polygon is not convex: {0}")]
    NonConvexDomain(String),

    #[error("query point ({x}, {y}) coincides with site {site}")]
    AtSite { x: f64, y: f64, site: usize },

    #[error("no pixel survives the epsilon mask (epsilon = {epsilon}, h = {h})")]
    EmptySupport { epsilon: f64, h: f64 },

    #[error("phase undersampled: h = {h} exceeds pi*tau/4 = {limit} for tau = {tau}")]
    UndersampledPhase { h: f64, tau: f64, limit: f64 },

    #[error("representable radius pi*tau/h = {max_radius} is below the required {required}")]
    FrequencyRangeTooSmall { max_radius: f64, required: f64 },

    #[error("no lattice cell falls in the annulus |r-1| <= {delta} (frequency cell {du} x {dv})")]
    EmptyAnnulus { delta: f64, du: f64, dv: f64 },

    #[error("probe ({radius}, {angle}) lies outside the frequency lattice")]
    OutOfRange { radius: f64, angle: f64 },

    #[error("histogram bins differ: {0}")]
    BinMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("at tau = {tau}: {source}")]
    AtTau {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable name of the error kind, printed by the command line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NonConvexDomain(_) => "NonConvexDomain",
            Error::AtSite { .. } => "AtSite",
            Error::EmptySupport { .. } => "EmptySupport",
            Error::UndersampledPhase { .. } => "UndersampledPhase",
            Error::FrequencyRangeTooSmall { .. } => "FrequencyRangeTooSmall",
            Error::EmptyAnnulus { .. } => "EmptyAnnulus",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::BinMismatch(_) => "BinMismatch",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse { .. } => "Parse",
            Error::AtTau { source, .. } => source.kind(),
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn at_tau(self, tau: f64) -> Self {
        match self {
            Error::AtTau { .. } => self,
            other => Error::AtTau {
                tau,
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
