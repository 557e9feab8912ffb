use serde::{Deserialize, Serialize};

use crate::geom::{ExtPoint, Region, RegionKind};

use super::MetricError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `1 / dist` on a half-plane.
    HalfPlaneExact,
    /// `2r / (r² − |z − c|²)` on a disk.
    DiskExact,
    /// `2r / (|z − c|² − r²)` on the exterior of a disk.
    DiskExteriorExact,
    /// `1 / dist` standing in for the hyperbolic density of a simply connected domain.
    SimplyConnectedProxy,
    /// `1 / dist` as the quasihyperbolic density itself.
    Quasihyperbolic,
}

/// Which density a metric computation used, with its guaranteed sandwich
/// factors against the true hyperbolic density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub kind: DensityKind,
    pub factor_bounds: (f64, f64),
}

impl DensityModel {
    pub fn half_plane_exact() -> Self {
        DensityModel { kind: DensityKind::HalfPlaneExact, factor_bounds: (1.0, 1.0) }
    }

    pub fn disk_exact() -> Self {
        DensityModel { kind: DensityKind::DiskExact, factor_bounds: (1.0, 1.0) }
    }

    pub fn disk_exterior_exact() -> Self {
        DensityModel { kind: DensityKind::DiskExteriorExact, factor_bounds: (1.0, 1.0) }
    }

    pub fn proxy() -> Self {
        DensityModel { kind: DensityKind::SimplyConnectedProxy, factor_bounds: (0.5, 2.0) }
    }

    pub fn quasihyperbolic() -> Self {
        DensityModel { kind: DensityKind::Quasihyperbolic, factor_bounds: (1.0, 1.0) }
    }

    /// The exact model when one exists for the domain's shape, else the proxy.
    pub fn best_for(domain: &Region) -> Self {
        match (&domain.kind, domain.complemented) {
            (RegionKind::HalfPlane { .. }, _) => Self::half_plane_exact(),
            (RegionKind::Disk { .. }, false) => Self::disk_exact(),
            (RegionKind::Disk { .. }, true) => Self::disk_exterior_exact(),
            (RegionKind::PolyJordan { .. }, _) => Self::proxy(),
        }
    }

    pub fn is_compatible(&self, domain: &Region) -> bool {
        match self.kind {
            DensityKind::HalfPlaneExact => matches!(domain.kind, RegionKind::HalfPlane { .. }),
            DensityKind::DiskExact => matches!(domain.kind, RegionKind::Disk { .. }) && !domain.complemented,
            DensityKind::DiskExteriorExact => matches!(domain.kind, RegionKind::Disk { .. }) && domain.complemented,
            DensityKind::SimplyConnectedProxy | DensityKind::Quasihyperbolic => true,
        }
    }

    // Density at a point already known to be interior.
    pub(crate) fn eval(&self, domain: &Region, z: num_complex::Complex64) -> f64 {
        match (self.kind, &domain.kind) {
            (DensityKind::DiskExact, RegionKind::Disk { center, radius }) => {
                2.0 * radius / (radius * radius - (z - center).norm_sqr())
            }
            (DensityKind::DiskExteriorExact, RegionKind::Disk { center, radius }) => {
                2.0 * radius / ((z - center).norm_sqr() - radius * radius)
            }
            _ => 1.0 / domain.boundary_distance_finite(z),
        }
    }
}

/// Hyperbolic density of `domain` at an interior point.
pub fn hyperbolic_density(domain: &Region, z: ExtPoint, model: &DensityModel) -> Result<f64, MetricError> {
    if !model.is_compatible(domain) {
        return Err(MetricError::IncompatibleModel(model.kind));
    }
    let z = z.finite().ok_or(MetricError::PointNotInterior)?;
    if !domain.contains(z) {
        return Err(MetricError::PointNotInterior);
    }
    Ok(model.eval(domain, z))
}
