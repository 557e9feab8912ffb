use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::point::ExtPoint;
use super::region::{Rect, Region, RegionKind};
use super::GeomError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedRegion {
    pub name: String,
    #[serde(flatten)]
    pub region: Region,
}

/// Boundary samples attached to a named region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub name: String,
    pub region: String,
    pub points: Vec<ExtPoint>,
}

/// Regions, boundary samples and free-form metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Scene {
    pub regions: Vec<NamedRegion>,
    pub samples: Vec<SampleSet>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Scene {
    pub fn region(&self, name: &str) -> Result<&Region, GeomError> {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.region)
            .ok_or_else(|| GeomError::InvalidScene(format!("no region named {name:?}")))
    }

    pub fn samples(&self, name: &str) -> Result<&SampleSet, GeomError> {
        self.samples
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| GeomError::InvalidScene(format!("no sample set named {name:?}")))
    }

    pub fn add_region(&mut self, name: &str, region: Region) {
        self.regions.push(NamedRegion { name: name.to_string(), region });
    }

    pub fn add_samples(&mut self, name: &str, region: &str, points: Vec<ExtPoint>) {
        self.samples.push(SampleSet { name: name.to_string(), region: region.to_string(), points });
    }

    /// Characteristic length used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let mut pts = Vec::new();
        for s in &self.samples {
            pts.extend(s.points.iter().filter_map(|p| p.finite()));
        }
        let mut bbox = Rect::bounding(&pts);
        for r in &self.regions {
            if let Some(b) = r.region.boundary_bbox() {
                bbox = Some(match bbox {
                    Some(a) => a.union(&b),
                    None => b,
                });
            }
        }
        bbox.map(|b| b.width().hypot(b.height())).unwrap_or(0.0).max(1.0)
    }

    /// Checks region invariants and that every sample lies on its region's boundary.
    pub fn validate(&self) -> Result<(), GeomError> {
        for r in &self.regions {
            r.region
                .validate()
                .map_err(|e| GeomError::InvalidScene(format!("region {:?}: {e}", r.name)))?;
        }
        let tol = 1e-9 * self.scale();
        for s in &self.samples {
            let region = self.region(&s.region)?;
            for (i, p) in s.points.iter().enumerate() {
                if !p.is_valid() {
                    return Err(GeomError::InvalidScene(format!("sample {}[{i}] is not finite", s.name)));
                }
                let on_boundary = match p {
                    ExtPoint::Infinity => matches!(region.kind, RegionKind::HalfPlane { .. }),
                    ExtPoint::Finite(z) => region.boundary_distance_finite(*z) <= tol,
                };
                if !on_boundary {
                    return Err(GeomError::InvalidScene(format!(
                        "sample {}[{i}] = {p} is not on the boundary of {:?}",
                        s.name, s.region
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Scene, GeomError> {
        let scene: Scene = serde_json::from_str(s).map_err(|e| GeomError::InvalidScene(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }
}
