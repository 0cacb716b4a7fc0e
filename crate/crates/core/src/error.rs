use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::ValidationErrors;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    InvalidScenario(#[from] ValidationErrors),

    #[error("failed to parse scenario{}: {message}", path.as_ref().map(|p| format!(" {}", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("endpoints unreachable: distance {distance:.3} m exceeds reach {reach:.3} m")]
    EndpointsUnreachable { distance: f64, reach: f64 },

    #[error("infeasible path: {0}")]
    InfeasiblePath(String),

    #[error("infeasible layout: {0}")]
    InfeasibleLayout(String),

    #[error("infeasible covariance: {0}")]
    InfeasibleCovariance(String),

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("aperture too small for spacing: {count} antennas at {min_spacing} m need {required} m, have {aperture} m")]
    ApertureTooSmall {
        count: usize,
        min_spacing: f64,
        required: f64,
        aperture: f64,
    },

    #[error("slot {slot} out of range (1..={slots})")]
    SlotOutOfRange { slot: usize, slots: usize },

    #[error("grid too fine: {cells} cells exceeds the limit of {limit}")]
    GridTooFine { cells: u64, limit: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable variant name, used as the error tag on the command line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidScenario(_) => "InvalidScenario",
            Error::Parse { .. } => "Parse",
            Error::Io { .. } => "Io",
            Error::Serialize(_) => "Serialize",
            Error::EndpointsUnreachable { .. } => "EndpointsUnreachable",
            Error::InfeasiblePath(_) => "InfeasiblePath",
            Error::InfeasibleLayout(_) => "InfeasibleLayout",
            Error::InfeasibleCovariance(_) => "InfeasibleCovariance",
            Error::NotPsd { .. } => "NotPsd",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ApertureTooSmall { .. } => "ApertureTooSmall",
            Error::SlotOutOfRange { .. } => "SlotOutOfRange",
            Error::GridTooFine { .. } => "GridTooFine",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
