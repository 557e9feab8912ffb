use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::homeo::{BoundaryHomeo, Carrier};
use super::ExtensionError;

/// Parameter grid used for sup norms of circle maps.
pub const LIFT_GRID: usize = 4096;

/// Lifts `F`, `G` of two circle homeomorphisms under `θ ↦ e^{2πiθ}`, with
/// `G` shifted by the integer `k` that brings it closest to `F`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftPair {
    pub f: BoundaryHomeo,
    pub g: BoundaryHomeo,
    pub k: i64,
    /// `sup |F - G|` on the grid.
    pub sup_gap: f64,
    /// `sup |f - g|` on the grid, images projected to the unit circle.
    pub sup_fg: f64,
}

impl LiftPair {
    #[allow(non_snake_case)]
    pub fn F(&self, theta: f64) -> f64 {
        self.f.lift(theta)
    }

    #[allow(non_snake_case)]
    pub fn G(&self, theta: f64) -> f64 {
        self.g.lift(theta) + self.k as f64
    }
}

fn prepared(h: &BoundaryHomeo) -> Result<BoundaryHomeo, ExtensionError> {
    if !matches!(h.carrier, Carrier::Circle { .. }) {
        return Err(ExtensionError::InvalidCarrier);
    }
    let mut h = h.clone();
    h.prepare()?;
    Ok(h)
}

/// Lifts of `f` and `g` with `sup |F - G|` minimal over integer shifts of `G`.
pub fn circle_lift_pair(f: &BoundaryHomeo, g: &BoundaryHomeo) -> Result<LiftPair, ExtensionError> {
    let f = prepared(f)?;
    let g = prepared(g)?;
    let mut d = Vec::with_capacity(LIFT_GRID);
    let mut sup_fg = 0.0f64;
    for i in 0..LIFT_GRID {
        let th = i as f64 / LIFT_GRID as f64;
        let (lf, lg) = (f.lift(th), g.lift(th));
        d.push(lf - lg);
        sup_fg = sup_fg.max((Complex64::from_polar(1.0, TAU * lf) - Complex64::from_polar(1.0, TAU * lg)).norm());
    }
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best = (f64::INFINITY, 0i64);
    for k in lo.floor() as i64..=hi.ceil() as i64 {
        let gap = (hi - k as f64).max(k as f64 - lo);
        if gap < best.0 {
            best = (gap, k);
        }
    }
    Ok(LiftPair { f, g, k: best.1, sup_gap: best.0, sup_fg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn rotation(angle: f64) -> BoundaryHomeo {
        let r = Complex64::from_polar(1.0, angle);
        BoundaryHomeo::circle_from_fn(|t| r * Complex64::from_polar(1.0, TAU * t), c(0.0, 0.0), 1.0, 256).unwrap()
    }

    #[test]
    fn identity_and_rotations() {
        let id = rotation(0.0);
        assert_eq!(circle_lift_pair(&id, &id).unwrap().sup_gap, 0.0);
        let half = circle_lift_pair(&id, &rotation(std::f64::consts::PI)).unwrap();
        assert!((half.sup_gap - 0.5).abs() < 1e-12);
        assert!((half.sup_fg - 2.0).abs() < 1e-12);
        let eps = circle_lift_pair(&id, &rotation(0.01)).unwrap();
        assert!((eps.sup_gap - 0.01 / TAU).abs() < 1e-12);
        assert!(eps.sup_gap <= 0.5 * eps.sup_fg);
        assert!((eps.F(0.3) - eps.G(0.3) + 0.01 / TAU).abs() < 1e-12);
    }
}
