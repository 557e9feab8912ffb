//! Extended-plane points, chordal metric, cross-ratios, Möbius maps and regions.

mod mobius;
mod point;
mod region;
mod scene;

pub use mobius::{apply_mobius, MobiusMap};
pub use point::{chordal_distance, cross_ratio, diameter, relative_distance, serde_complex, ExtPoint, Metric};
pub use region::{boundary_distance, is_simple_polygon, sample_polygon, segment_distance, Rect, Region, RegionKind};
pub use scene::{NamedRegion, SampleSet, Scene};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("two points of the quadruple coincide")]
    DegenerateQuadruple,
    #[error("operation not defined at infinity")]
    InfinityNotSupported,
    #[error("point cloud has zero diameter")]
    DegenerateSet,
    #[error("Möbius coefficients are degenerate (ad - bc ~ 0)")]
    DegenerateMobius,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("the pole of the map lies on the region boundary")]
    PoleOnBoundary,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}
