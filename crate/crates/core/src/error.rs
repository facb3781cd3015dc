use thiserror::Error;

use crate::convergence::DetectError;
use crate::matrices::MatrixError;
use crate::schedule::ScheduleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
