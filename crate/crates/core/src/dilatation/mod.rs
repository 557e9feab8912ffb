//! Dilatation of PL and sampled maps, and conformal moduli of ring domains.

mod affine;
mod modulus;

pub use affine::{
    affine_coefficients, default_step, dilatation_from, numeric_beltrami, pl_dilatation, wirtinger, DilatationMethod,
    DilatationReport,
};
pub use modulus::{
    extension_condition_check, ring_modulus, ExtensionConditionReport, ModulusMethod, ModulusReport, ModulusSolve,
    RingSpec,
};

use thiserror::Error;

use crate::geom::GeomError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DilatationError {
    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },
    #[error("{reversed} of {nodes} nodes look orientation-reversing; the difference step is too large")]
    StepTooLarge { reversed: usize, nodes: usize },
    #[error("not a ring domain: {0}")]
    NotARing(String),
    #[error("solver stopped after {iterations} iterations at relative residual {residual}")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}
