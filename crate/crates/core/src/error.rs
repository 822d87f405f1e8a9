use thiserror::Error;

use crate::baselines::BaselineError;
use crate::closure::ClosureError;
use crate::dag::DagError;
use crate::dynnet::DynNetError;
use crate::learn::LearnError;
use crate::semiring::SemiringViolation;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Semiring(#[from] SemiringViolation),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    DynNet(#[from] DynNetError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
