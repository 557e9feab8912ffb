//! Empirical distortion profiles, quasicircle constants and the pair verdict.

mod profile;
mod quasicircle;
mod verdict;

pub use profile::{
    increasing_qs_ratio, matrix_cross_ratio, qm_profile, qs_profile, qs_ratio_at, DistortionProfile, ProfileKind,
    QsRatio, MAX_EXP, MIN_EXP,
};
pub use quasicircle::{quasicircle_constants, QuasicircleReport};
pub use verdict::{pair_verdict, PairVerdict, VerdictOptions};

use thiserror::Error;

use crate::geom::GeomError;
use crate::metric::MetricError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistortionError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("metric tables have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("function is not strictly increasing near x = {x}")]
    NotMonotone { x: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
