//! Deferred Cesaro means, the sequence spaces built from them, and
//! conullity tests for matrix summability domains.

pub mod cli;
pub mod convergence;
pub mod criteria;
pub mod error;
pub mod harness;
pub mod matrices;
pub mod means;
mod parse;
pub mod scalar;
pub mod schedule;
pub mod seq;
pub mod spaces;

pub use convergence::{detect_limit, ConvergenceVerdict, DetectParams, Status};
pub use error::{Error, Result};
pub use matrices::{CatalogMatrix, InfiniteMatrix};
pub use means::{cesaro_mean, deferred_mean, partial_sums};
pub use scalar::Scalar;
pub use schedule::DefermentSchedule;
pub use seq::{Seq, Tail};
pub use spaces::SpaceId;
