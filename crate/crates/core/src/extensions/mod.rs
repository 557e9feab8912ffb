//! Explicit quasiconformal extensions of boundary homeomorphisms, emitted as
//! piecewise-linear meshes or exact callables.

mod annulus;
mod ba;
mod checks;
mod dyadic;
mod homeo;
mod lift;
mod plmap;
mod power;
mod strip;

pub use annulus::{
    annulus_extend_general, annulus_extend_large, annulus_extend_unit, annulus_subdivisions, empirical_eta4,
    sample_annulus_map, AnnulusOptions, LargeAnnulusExtension, LargeOptions, RadialInterp,
};
pub use ba::{ba_extend, ba_extend_fn, BA_NODES};
pub use checks::{annuli_identity_check, strip_bounds_check, AnnuliBounds, StripBounds};
pub use dyadic::dyadic_pl_extend;
pub use homeo::{BoundaryHomeo, Carrier, HomeoSample};
pub use lift::{circle_lift_pair, LiftPair, LIFT_GRID};
pub use plmap::{find_overlap, orient, triangles_overlap, PLMap};
pub use power::{power_map, PowerMap};
pub use strip::trapezoid_strip_extend;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("h({n}) = {value}, expected {n}")]
    NotAnchored { n: i64, value: f64 },
    #[error("boundary map is not increasing at sample {index}")]
    NotIncreasing { index: usize },
    #[error("cell {cell}: trapezoid corner distance {distance} outside the allowed spread")]
    CellDistortionTooLarge { cell: i64, distance: f64 },
    #[error("boundary samples do not cover [{x} - {y}, {x} + {y}]")]
    QuadratureRangeExceeded { x: f64, y: f64 },
    #[error("circle map reverses orientation")]
    NotOrientationPreserving,
    #[error("arc {arc}: endpoint distance {distance} outside the allowed spread")]
    PreconditionSpread { arc: u32, distance: f64 },
    #[error("radius {l} must lie in (1, {m})")]
    RadiusOutOfRange { l: f64, m: f64 },
    #[error("log L'/log L = {ratio} is outside [1/{c0}, {c0}]")]
    LogRatioViolation { ratio: f64, c0: f64 },
    #[error("the origin has no image under a power map")]
    OriginExcluded,
    #[error("sample {index} is mapped to the wrong side of the real axis")]
    WrongSideOfLine { index: usize },
    #[error("sample {index} is mapped into the closed unit disk")]
    ImageInsideDisk { index: usize },
    #[error("sample {index} should be fixed")]
    NotIdentityOnBase { index: usize },
    #[error("parameter {x} is outside the sampled range")]
    OutOfRange { x: f64 },
    #[error("boundary map lives on the wrong carrier")]
    InvalidCarrier,
    #[error("triangle {triangle} is degenerate or negatively oriented")]
    DegenerateTriangle { triangle: usize },
    #[error("{0}")]
    InvalidInput(String),
}
