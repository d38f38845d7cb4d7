//! Numerical laboratory for period-doubling renormalization of unimodal
//! interval maps.
//!
//! The crate builds the periodic-point scaffold of a Feigenbaum map, the
//! induced Markov map with its inverse branches, and the itinerary-based
//! conjugacy between two such maps, together with quantitative reports on
//! interval geometry, nonlinearity bounds, branch distortion and the
//! quasisymmetric constant of the conjugacy.

pub mod cascade;
pub mod cli;
pub mod config;
pub mod conjugacy;
pub mod exec;
pub mod interval;
pub mod jet;
pub mod maps;
pub mod markov;
pub mod report;
pub mod roots;
pub mod scaffold;

pub use interval::Interval;
pub use jet::Jet3;
pub use maps::{Family, MapSpec};

use thiserror::Error;

/// Error type shared by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no sign change over bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("invalid map parameter: {0}")]
    InvalidParameter(String),
    #[error("orbit escaped [-1,1] at step {step} (x = {x})")]
    OrbitEscape { step: usize, x: f64 },
    #[error("map is not renormalizable at stage {0}")]
    NotRenormalizable(usize),
    #[error("multiple fixed-point candidates at stage {0}")]
    AmbiguousFixedPoint(usize),
    #[error("no superstable bracket found at cascade level {0}")]
    BracketNotFound(usize),
    #[error("point {0} lies in the residual interval")]
    ResidualPoint(f64),
    #[error("point {0} lies on a partition boundary")]
    BoundaryPoint(f64),
    #[error("value {0} is outside the branch image")]
    OutOfImage(f64),
    #[error("branch extension is not monotone at level {0}")]
    ExtensionNotMonotone(usize),
    #[error("word {0} is inadmissible on the image side")]
    CombinatorialMismatch(String),
    #[error("no depth up to {0} meets the error target for scale {1}")]
    DepthInsufficient(usize, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
