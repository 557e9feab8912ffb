use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geom::{ExtPoint, Metric, MobiusMap, Region};
use crate::metric::{Connectivity, DensityModel, DistanceMatrix, GridSpec, RelativeMetric};

use super::profile::{qm_profile, DistortionProfile};
use super::DistortionError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    pub budget: usize,
    pub seed: u64,
    /// `eta_hat(1)` must stay below this for the profile to count as bounded.
    pub threshold: f64,
    /// When set, distances are computed after `z ↦ 1/(z − p)`; use a point of
    /// `U` so that infinity leaves the admissible area.
    pub chart_pole: Option<[f64; 2]>,
    /// Density of `U*`; `None` picks the exact model when available.
    pub model: Option<DensityModel>,
    /// Subdivisions per polygon edge when mapping regions to the new chart.
    pub polygon_segments: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { budget: 200_000, seed: 0, threshold: 100.0, chart_pole: None, model: None, polygon_segments: 64 }
    }
}

/// Empirical quasi-Möbius profile of the identity from `(∂V, d_{V,U})` to
/// `(∂V, chordal)`, reported with the sampling scale it was computed at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub profile: DistortionProfile,
    pub bounded_at_scale: bool,
    pub eta_one: Option<f64>,
    pub end_slope: Option<f64>,
    pub threshold: f64,
    pub grid_h: f64,
    pub connectivity: Connectivity,
    pub samples: usize,
    pub chart_pole: Option<[f64; 2]>,
    pub density_model: DensityModel,
    /// Relative hyperbolic distances between the samples.
    pub table: DistanceMatrix,
}

/// Runs the pair test for `U`, `V` on boundary samples of `V`.
pub fn pair_verdict(
    u: &Region,
    v: &Region,
    samples: &[ExtPoint],
    spec: &GridSpec,
    opts: &VerdictOptions,
) -> Result<PairVerdict, DistortionError> {
    let (u_c, v_c, pts) = match opts.chart_pole {
        Some([x, y]) => {
            let t = MobiusMap::pole_at(Complex64::new(x, y));
            let u_c = u.mobius_image(&t, opts.polygon_segments)?;
            let v_c = v.mobius_image(&t, opts.polygon_segments)?;
            let pts: Vec<ExtPoint> = samples.iter().map(|&z| t.apply(z)).collect();
            (u_c, v_c, pts)
        }
        None => (u.clone(), v.clone(), samples.to_vec()),
    };
    let model = opts.model.unwrap_or_else(|| DensityModel::best_for(&u_c.complement()));
    let rm = RelativeMetric::new(&u_c, &v_c, spec, model)?;
    let table = rm.table(&pts)?;
    let chordal = DistanceMatrix::from_points(samples, Metric::Chordal);
    let profile = qm_profile(&table, &chordal, opts.budget, opts.seed)?;
    let eta_one = profile.eta_one();
    let end_slope = profile.end_slope();
    let bounded_at_scale = eta_one.map_or(false, |e| e < opts.threshold) && end_slope.map_or(true, |s| s < 1.5);
    Ok(PairVerdict {
        profile,
        bounded_at_scale,
        eta_one,
        end_slope,
        threshold: opts.threshold,
        grid_h: spec.h,
        connectivity: spec.connectivity,
        samples: samples.len(),
        chart_pole: opts.chart_pole,
        density_model: model,
        table,
    })
}
