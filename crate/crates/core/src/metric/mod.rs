//! Hyperbolic, quasihyperbolic and relative hyperbolic distances computed as
//! density-weighted shortest paths on masked grids.

mod density;
mod grid;
mod table;

pub use density::{hyperbolic_density, DensityKind, DensityModel};
pub use grid::{Connectivity, GridSpec, MetricGrid, ShortestPaths, DEFAULT_WINDOW};
pub use table::DistanceMatrix;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{ExtPoint, Rect, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("point is not interior to the domain")]
    PointNotInterior,
    #[error("density model {0:?} does not apply to this domain")]
    IncompatibleModel(DensityKind),
    #[error("endpoint lies in the closure of U")]
    EndpointInsideU,
    #[error("points are not connected in the grid at this resolution")]
    Unreachable,
    #[error("no admissible node within 2h of ({re}, {im})")]
    SnapFailed { re: f64, im: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("the domain is the whole plane")]
    WholePlane,
    #[error("regions overlap")]
    RegionsOverlap,
}

/// Distance and grid path returned by the metric computations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub distance: f64,
    #[serde(with = "crate::geom::serde_complex::vec")]
    pub path: Vec<Complex64>,
    pub density_model: DensityModel,
}

fn default_window(bounded: Option<Rect>, h: f64) -> Rect {
    match bounded {
        Some(b) => b.expand(2.0 * h),
        None => Rect::square(DEFAULT_WINDOW),
    }
}

fn geodesic(grid: &MetricGrid, a: usize, b: usize, model: DensityModel) -> Result<GeodesicResult, MetricError> {
    let sp = grid.shortest_paths(a, Some(b));
    let d = sp.dist[b];
    if !d.is_finite() {
        return Err(MetricError::Unreachable);
    }
    let path = sp.path_to(b).into_iter().map(|n| grid.position(n)).collect();
    Ok(GeodesicResult { distance: d, path, density_model: model })
}

/// Quasihyperbolic distance `k_Ω(z, w)` with density `1 / dist(·, ∂Ω)`.
pub fn quasihyperbolic_distance(
    domain: &Region,
    z: ExtPoint,
    w: ExtPoint,
    spec: &GridSpec,
) -> Result<GeodesicResult, MetricError> {
    let model = DensityModel::quasihyperbolic();
    let z = z.finite().ok_or(MetricError::PointNotInterior)?;
    let w = w.finite().ok_or(MetricError::PointNotInterior)?;
    if !domain.contains(z) || !domain.contains(w) {
        return Err(MetricError::PointNotInterior);
    }
    if z == w {
        return Ok(GeodesicResult { distance: 0.0, path: vec![z], density_model: model });
    }
    let bounded = if domain.is_bounded() { domain.boundary_bbox() } else { None };
    let window = spec.window.unwrap_or_else(|| default_window(bounded, spec.h));
    let grid = MetricGrid::build(
        window,
        spec.h,
        spec.connectivity,
        |p| domain.contains(p),
        |p| 1.0 / domain.boundary_distance_finite(p),
    )?;
    let a = grid.snap(z)?;
    let b = grid.snap(w)?;
    geodesic(&grid, a, b, model)
}

/// Grid for the relative hyperbolic metric `d_{V,U}`.
///
/// Paths run through `closure(U*) \ V` and are weighted by the hyperbolic
/// density of `U*`, the complement of `closure(U)`.
#[derive(Clone, Debug)]
pub struct RelativeMetric {
    pub grid: MetricGrid,
    pub model: DensityModel,
    u: Region,
}

impl RelativeMetric {
    pub fn new(u: &Region, v: &Region, spec: &GridSpec, model: DensityModel) -> Result<Self, MetricError> {
        let u_star = u.complement();
        if !model.is_compatible(&u_star) {
            return Err(MetricError::IncompatibleModel(model.kind));
        }
        let probe = v.interior_point();
        if u.contains(probe) {
            return Err(MetricError::RegionsOverlap);
        }
        let bounded = if u_star.is_bounded() { u_star.boundary_bbox() } else { None };
        let window = spec.window.unwrap_or_else(|| default_window(bounded, spec.h));
        let grid = MetricGrid::build(
            window,
            spec.h,
            spec.connectivity,
            |p| u_star.contains(p) && !v.contains(p),
            |p| model.eval(&u_star, p),
        )?;
        Ok(RelativeMetric { grid, model, u: u.clone() })
    }

    fn endpoint(&self, z: ExtPoint) -> Result<usize, MetricError> {
        let z = z.finite().ok_or(MetricError::PointNotInterior)?;
        if self.u.closure_contains(z) {
            return Err(MetricError::EndpointInsideU);
        }
        self.grid.snap(z)
    }

    pub fn distance(&self, z: ExtPoint, w: ExtPoint) -> Result<GeodesicResult, MetricError> {
        let a = self.endpoint(z)?;
        let b = self.endpoint(w)?;
        if z == w {
            return Ok(GeodesicResult {
                distance: 0.0,
                path: vec![z.finite().expect("checked finite")],
                density_model: self.model,
            });
        }
        geodesic(&self.grid, a, b, self.model)
    }

    /// All pairwise distances, one Dijkstra per sample.
    pub fn table(&self, samples: &[ExtPoint]) -> Result<DistanceMatrix, MetricError> {
        let nodes: Vec<usize> = samples.iter().map(|&z| self.endpoint(z)).collect::<Result<_, _>>()?;
        let n = nodes.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if i + 1 == n {
                    return Vec::new();
                }
                let sp = self.grid.shortest_paths(nodes[i], None);
                nodes[i + 1..].iter().map(|&t| sp.dist[t]).collect()
            })
            .collect();
        let mut m = DistanceMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (k, &d) in row.iter().enumerate() {
                let j = i + 1 + k;
                let d = if samples[i] == samples[j] { 0.0 } else { d };
                if !d.is_finite() {
                    return Err(MetricError::Unreachable);
                }
                m.set(i, j, d);
            }
        }
        Ok(m)
    }
}

/// `d_{V,U}(z, w)` for `z, w` on `∂V`.
pub fn relative_hyperbolic_distance(
    u: &Region,
    v: &Region,
    z: ExtPoint,
    w: ExtPoint,
    spec: &GridSpec,
    model: DensityModel,
) -> Result<GeodesicResult, MetricError> {
    RelativeMetric::new(u, v, spec, model)?.distance(z, w)
}

/// Symmetric matrix of `d_{V,U}` between boundary samples of `V`.
pub fn metric_table(
    u: &Region,
    v: &Region,
    samples: &[ExtPoint],
    spec: &GridSpec,
    model: DensityModel,
) -> Result<DistanceMatrix, MetricError> {
    RelativeMetric::new(u, v, spec, model)?.table(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> ExtPoint {
        ExtPoint::new(x, y)
    }

    #[test]
    fn parallel_halfplanes_horizontal_pairs() {
        let u = Region::upper(1.0);
        let v = Region::lower(0.0);
        let spec = GridSpec::with_h(0.02);
        let rm = RelativeMetric::new(&u, &v, &spec, DensityModel::half_plane_exact()).unwrap();
        let d = rm.distance(p(0.0, 0.0), p(3.0, 0.0)).unwrap();
        assert!((d.distance - 3.0).abs() < 0.03 * 3.0);
        assert_eq!(rm.distance(p(1.0, 0.0), p(1.0, 0.0)).unwrap().distance, 0.0);
        assert_eq!(rm.distance(p(0.0, 1.0), p(1.0, 0.0)).unwrap_err(), MetricError::EndpointInsideU);
        let path: Vec<usize> = d.path.iter().map(|&z| rm.grid.snap(z).unwrap()).collect();
        assert!((rm.grid.path_length(&path).unwrap() - d.distance).abs() < 1e-12);
    }

    #[test]
    fn table_is_symmetric_with_zero_diagonal() {
        let u = Region::upper(1.0);
        let v = Region::lower(0.0);
        let spec = GridSpec::with_h(0.05);
        let t = metric_table(&u, &v, &[p(0.0, 0.0), p(3.0, 0.0), p(-1.0, 0.0)], &spec, DensityModel::half_plane_exact())
            .unwrap();
        for i in 0..3 {
            assert_eq!(t.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(t.get(i, j), t.get(j, i));
            }
        }
        let single = metric_table(&u, &v, &[p(0.0, 0.0)], &spec, DensityModel::half_plane_exact()).unwrap();
        assert_eq!(single.n(), 1);
        assert_eq!(single.get(0, 0), 0.0);
    }

    #[test]
    fn halfplane_vertical_quasihyperbolic() {
        let hp = Region::upper(0.0);
        let spec = GridSpec::with_h(0.01).window(Rect::new(-2.0, 2.0, 0.0, 3.0));
        let d = quasihyperbolic_distance(&hp, p(0.0, 1.0), p(0.0, 2.0), &spec).unwrap();
        assert!((d.distance - 2f64.ln()).abs() < 0.03 * 2f64.ln());
        assert_eq!(quasihyperbolic_distance(&hp, p(0.0, 1.0), p(0.0, 1.0), &spec).unwrap().distance, 0.0);
        assert_eq!(
            quasihyperbolic_distance(&hp, p(0.0, -1.0), p(0.0, 1.0), &spec).unwrap_err(),
            MetricError::PointNotInterior
        );
    }


    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn parallel(h: f64, window: Rect) -> RelativeMetric {
        let spec = GridSpec::with_h(h).window(window);
        RelativeMetric::new(&Region::upper(1.0), &Region::lower(0.0), &spec, DensityModel::half_plane_exact()).unwrap()
    }

    fn shared() -> &'static RelativeMetric {
        static M: OnceLock<RelativeMetric> = OnceLock::new();
        M.get_or_init(|| parallel(0.05, Rect::new(-6.0, 6.0, -1.0, 1.0)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn graph_distance_axioms(pts in prop::array::uniform3((-3.0..3.0f64, 0.0..0.9f64))) {
            let rm = shared();
            let [a, b, c] = pts.map(|(x, y)| p(x, y));
            let d = |z, w| rm.distance(z, w).unwrap().distance;
            let (ab, ba, bc, ac) = (d(a, b), d(b, a), d(b, c), d(a, c));
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
            prop_assert!(ac <= ab + bc + 1e-12 * ac.max(1.0));
            prop_assert_eq!(d(a, a), 0.0);
        }
    }

    #[test]
    fn refinement_converges() {
        let w = Rect::new(-3.0, 6.0, -3.0, 1.0);
        let at = |h| parallel(h, w).distance(p(0.0, 0.0), p(3.0, 0.0)).unwrap().distance;
        let (coarse, fine) = (at(0.01), at(0.005));
        assert!((coarse - fine).abs() < 0.02 * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn quasihyperbolic_band_on_small_disk() {
        // B = D(2i, 1/2) inside the upper half-plane, diam B <= dist(B, boundary) = 3/2
        let hp = Region::upper(0.0);
        let spec = GridSpec::with_h(0.01).window(Rect::new(-3.0, 3.0, 0.0, 5.0));
        let pairs = [((0.0, 1.6), (0.0, 2.4)), ((-0.3, 2.0), (0.35, 2.1)), ((0.1, 1.8), (0.12, 1.85)), ((-0.2, 2.3), (0.3, 1.7))];
        for ((x0, y0), (x1, y1)) in pairs {
            let (z, w) = (p(x0, y0), p(x1, y1));
            let k = quasihyperbolic_distance(&hp, z, w, &spec).unwrap().distance;
            let e = (z.finite().unwrap() - w.finite().unwrap()).norm();
            let ratio = k * 1.5 / e;
            assert!((0.2..=5.0).contains(&ratio), "ratio {ratio} for {z:?}, {w:?}");
        }
    }
}
