use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::geom::{MobiusMap, Region, RegionKind};

use super::DilatationError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusMethod {
    /// Closed form for round concentric rings, solver otherwise.
    #[default]
    Auto,
    Numeric,
}

/// Ring domain `C \ (inner ∪ outer)` bounded by two disjoint closed continua.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub inner: Region,
    pub outer: Region,
    /// Step of the solver grid in logarithmic coordinates.
    pub h: f64,
    #[serde(default)]
    pub method: ModulusMethod,
}

impl RingSpec {
    pub fn new(inner: Region, outer: Region, h: f64) -> Self {
        RingSpec { inner, outer, h, method: ModulusMethod::Auto }
    }

    pub fn numeric(mut self) -> Self {
        self.method = ModulusMethod::Numeric;
        self
    }

    /// Round annulus `r < |z - c| < R`.
    pub fn annulus(center: Complex64, r: f64, big_r: f64, h: f64) -> Result<Self, DilatationError> {
        if !(r > 0.0 && big_r > r) {
            return Err(DilatationError::NotARing(format!("radii {r}, {big_r}")));
        }
        Ok(RingSpec::new(Region::disk(center, r)?, Region::disk(center, big_r)?.complement(), h))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModulusSolve {
    ClosedForm,
    LogPolarDirichlet { h: f64, n_theta: usize, n_s: usize, unknowns: usize, iterations: usize, residual: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    /// Modulus of the family of curves separating the boundary components;
    /// `(1/2π) log(R/r)` for a round annulus.
    pub modulus: f64,
    /// Dirichlet energy of the harmonic measure, the reciprocal.
    pub capacity: f64,
    pub solve: ModulusSolve,
}

fn round_ring(inner: &Region, outer: &Region) -> Option<f64> {
    let disk = |r: &Region| match r.kind {
        RegionKind::Disk { center, radius } => Some((center, radius)),
        _ => None,
    };
    let (c1, r1) = disk(inner)?;
    let (c2, r2) = disk(outer)?;
    let (small, big) = match (inner.complemented, outer.complemented) {
        (false, true) => (r1, r2),
        (true, false) => (r2, r1),
        _ => return None,
    };
    if (c1 - c2).norm() > 1e-12 * big || !(big > small) {
        return None;
    }
    Some((big / small).ln() / TAU)
}

/// Reorders or Möbius-maps the continua so that `inner` is bounded and
/// `outer` is a neighbourhood of infinity.
fn normalize(inner: &Region, outer: &Region) -> Result<(Region, Region), DilatationError> {
    let good = |a: &Region, b: &Region| a.is_bounded() && b.contains_infinity();
    if good(inner, outer) {
        return Ok((inner.clone(), outer.clone()));
    }
    if good(outer, inner) {
        return Ok((outer.clone(), inner.clone()));
    }
    let t = MobiusMap::pole_at(outer.interior_point());
    let (a, b) = (inner.mobius_image(&t, 64)?, outer.mobius_image(&t, 64)?);
    if good(&a, &b) {
        Ok((a, b))
    } else {
        Err(DilatationError::NotARing("cannot place the continua in a bounded/unbounded pair".into()))
    }
}

/// Largest `λ ∈ [0, 1]` with `seg(λ)` outside `r`, given `seg(0)` outside and `seg(1)` inside.
fn cut_fraction(r: &Region, seg: impl Fn(f64) -> Complex64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if r.closure_contains(seg(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi)).max(1e-3)
}

/// Conformal modulus of the ring separating `inner` from `outer`.
///
/// The numeric path solves the Dirichlet problem for the harmonic measure in
/// the chart `w = log(z - p)`, `p` inside the inner continuum, on a periodic
/// square grid. Cut edges get the weight `1/θ` of their boundary fraction, so
/// the discrete energy is exact for round rings about `p`.
pub fn ring_modulus(spec: &RingSpec) -> Result<ModulusReport, DilatationError> {
    if spec.method == ModulusMethod::Auto {
        if let Some(m) = round_ring(&spec.inner, &spec.outer) {
            return Ok(ModulusReport { modulus: m, capacity: 1.0 / m, solve: ModulusSolve::ClosedForm });
        }
    }
    if !(spec.h > 0.0) {
        return Err(DilatationError::NotARing(format!("grid step {} must be positive", spec.h)));
    }
    let (inner, outer) = normalize(&spec.inner, &spec.outer)?;
    if outer.contains(inner.interior_point()) {
        return Err(DilatationError::NotARing("continua overlap".into()));
    }
    let bbox = outer.complement().boundary_bbox().expect("outer continuum has a bounded complement");
    let scale = bbox.width().max(bbox.height());
    let gap = inner
        .boundary_samples(1024)?
        .iter()
        .map(|&z| -outer.signed_distance(z))
        .fold(f64::INFINITY, f64::min);
    if !(gap > 1e-9 * scale) {
        return Err(DilatationError::NotARing("boundary components touch".into()));
    }

    let p = inner.interior_point();
    let d_in = inner.boundary_distance_finite(p);
    let corners = [
        Complex64::new(bbox.xmin, bbox.ymin),
        Complex64::new(bbox.xmin, bbox.ymax),
        Complex64::new(bbox.xmax, bbox.ymin),
        Complex64::new(bbox.xmax, bbox.ymax),
    ];
    let d_out = corners.iter().map(|c| (c - p).norm()).fold(0.0, f64::max);
    let n_theta = ((TAU / spec.h).round() as usize).max(16);
    let step = TAU / n_theta as f64;
    let s_min = d_in.ln() - 2.0 * step;
    let n_s = (((d_out.ln() + 2.0 * step) - s_min) / step).ceil() as usize + 1;
    let chart = |s: f64, th: f64| p + Complex64::from_polar(s.exp(), th);
    let node = |j: usize, i: usize| chart(s_min + step * j as f64, step * i as f64);

    // 0: inner continuum, 1: outer continuum, 2: unknown
    let class: Vec<u8> = (0..n_s * n_theta)
        .into_par_iter()
        .map(|k| {
            let z = node(k / n_theta, k % n_theta);
            if inner.closure_contains(z) {
                0
            } else if outer.closure_contains(z) {
                1
            } else {
                2
            }
        })
        .collect();
    let mut index = vec![usize::MAX; class.len()];
    let mut cells = Vec::new();
    for (k, &c) in class.iter().enumerate() {
        if c == 2 {
            index[k] = cells.len();
            cells.push(k);
        }
    }
    if cells.is_empty() {
        return Err(DilatationError::NotARing("no grid node lies in the ring".into()));
    }

    struct Row {
        diag: f64,
        nbrs: [usize; 4],
        rhs: f64,
        // boundary values and weights of cut edges, for the energy
        cuts: Vec<(f64, f64)>,
    }
    let rows: Vec<Result<Row, DilatationError>> = cells
        .par_iter()
        .map(|&k| {
            let (j, i) = (k / n_theta, k % n_theta);
            if j == 0 || j + 1 == n_s {
                return Err(DilatationError::NotARing("ring reaches the edge of the chart".into()));
            }
            let w0 = Complex64::new(s_min + step * j as f64, step * i as f64);
            let nb = [
                (j, (i + 1) % n_theta, Complex64::new(0.0, step)),
                (j, (i + n_theta - 1) % n_theta, Complex64::new(0.0, -step)),
                (j + 1, i, Complex64::new(step, 0.0)),
                (j - 1, i, Complex64::new(-step, 0.0)),
            ];
            let mut row = Row { diag: 0.0, nbrs: [usize::MAX; 4], rhs: 0.0, cuts: Vec::new() };
            for (slot, &(jj, ii, dw)) in nb.iter().enumerate() {
                let kk = jj * n_theta + ii;
                match class[kk] {
                    2 => {
                        row.diag += 1.0;
                        row.nbrs[slot] = index[kk];
                    }
                    c => {
                        let region = if c == 0 { &inner } else { &outer };
                        let frac = cut_fraction(region, |l| p + (w0 + dw * l).exp());
                        let g = c as f64;
                        row.diag += 1.0 / frac;
                        row.rhs += g / frac;
                        row.cuts.push((g, 1.0 / frac));
                    }
                }
            }
            Ok(row)
        })
        .collect();
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_, _>>()?;
    // an inner node next to an outer node means the components touch at this step
    let touching = (0..class.len()).into_par_iter().any(|k| {
        let (j, i) = (k / n_theta, k % n_theta);
        let up = (j + 1 < n_s) && class[k] != 2 && class[(j + 1) * n_theta + i] != 2 && class[k] != class[(j + 1) * n_theta + i];
        let right = class[k] != 2 && class[j * n_theta + (i + 1) % n_theta] != 2 && class[k] != class[j * n_theta + (i + 1) % n_theta];
        up || right
    });
    if touching {
        return Err(DilatationError::NotARing("components touch at the grid step".into()));
    }

    let n = rows.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let row = &rows[r];
            let mut acc = row.diag * x[r];
            for &nb in &row.nbrs {
                if nb != usize::MAX {
                    acc -= x[nb];
                }
            }
            *out = acc;
        });
    };
    let dot = |a: &[f64], b: &[f64]| a.par_iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let b: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.5; n];
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&rows).map(|(r, row)| r / row.diag).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 50 * (n_s + n_theta) + 1000;
    let mut iterations = 0;
    let mut res = dot(&r, &r).sqrt() / bnorm;
    let mut q = vec![0.0; n];
    while res > 1e-8 {
        if iterations >= max_iter || !res.is_finite() {
            return Err(DilatationError::SolverDiverged { iterations, residual: res });
        }
        apply(&d, &mut q);
        let alpha = rz / dot(&d, &q);
        x.par_iter_mut().zip(&d).for_each(|(x, d)| *x += alpha * d);
        r.par_iter_mut().zip(&q).for_each(|(r, q)| *r -= alpha * q);
        z.par_iter_mut().zip(&r).zip(&rows).for_each(|((z, r), row)| *z = r / row.diag);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        d.par_iter_mut().zip(&z).for_each(|(d, z)| *d = z + beta * *d);
        res = dot(&r, &r).sqrt() / bnorm;
        iterations += 1;
    }

    let energy: f64 = rows
        .par_iter()
        .enumerate()
        .map(|(a, row)| {
            let mut e = 0.0;
            for &nb in &row.nbrs {
                // count every interior edge once
                if nb != usize::MAX && nb > a {
                    e += (x[a] - x[nb]).powi(2);
                }
            }
            for &(g, w) in &row.cuts {
                e += w * (x[a] - g).powi(2);
            }
            e
        })
        .sum();
    Ok(ModulusReport {
        modulus: 1.0 / energy,
        capacity: energy,
        solve: ModulusSolve::LogPolarDirichlet { h: step, n_theta, n_s, unknowns: n, iterations, residual: res },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConditionReport {
    pub mod_gamma: f64,
    pub mod_gamma_prime: f64,
    /// `Mod Γ' / Mod Γ`.
    pub ratio: f64,
    /// `ratio ∈ [1/K0, K0]`, when `K0` was given.
    pub ratio_within: Option<bool>,
    /// `Mod Γ <= M`, when `M` was given.
    pub modulus_bounded: Option<bool>,
}

/// Moduli of the rings between `(U, V)` and `(U', V')` and the two
/// conditions on them.
pub fn extension_condition_check(
    pair: (&Region, &Region),
    image: (&Region, &Region),
    h: f64,
    k0: Option<f64>,
    m: Option<f64>,
) -> Result<ExtensionConditionReport, DilatationError> {
    let a = ring_modulus(&RingSpec::new(pair.1.clone(), pair.0.clone(), h))?.modulus;
    let b = ring_modulus(&RingSpec::new(image.1.clone(), image.0.clone(), h))?.modulus;
    let ratio = b / a;
    Ok(ExtensionConditionReport {
        mod_gamma: a,
        mod_gamma_prime: b,
        ratio,
        ratio_within: k0.map(|k| ratio >= 1.0 / k && ratio <= k),
        modulus_bounded: m.map(|m| a <= m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn closed_forms() {
        let o = c(0.0, 0.0);
        let m = ring_modulus(&RingSpec::annulus(o, 1.0, TAU.exp(), 0.01).unwrap()).unwrap();
        assert!((m.modulus - 1.0).abs() < 1e-12);
        let m = ring_modulus(&RingSpec::annulus(o, 1.0, 1f64.exp(), 0.01).unwrap()).unwrap();
        assert!((m.modulus - 1.0 / TAU).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_round_annulus() {
        let spec = RingSpec::annulus(c(0.3, -0.2), 1.0, 2.0, 0.02).unwrap().numeric();
        let m = ring_modulus(&spec).unwrap();
        assert!((m.modulus - 2f64.ln() / TAU).abs() < 1e-3 * m.modulus, "{m:?}");
    }

    #[test]
    fn mobius_image_of_a_ring() {
        let spec = RingSpec::annulus(c(0.0, 0.0), 1.0, 2.0, 0.01).unwrap();
        let t = MobiusMap::pole_at(c(3.0, 0.5));
        let img = RingSpec::new(
            spec.inner.mobius_image(&t, 64).unwrap(),
            spec.outer.mobius_image(&t, 64).unwrap(),
            0.01,
        );
        let m = ring_modulus(&img).unwrap().modulus;
        assert!((m - 2f64.ln() / TAU).abs() < 0.02 * m, "{m}");
    }

    #[test]
    fn touching_disks_are_rejected() {
        let a = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        let b = Region::disk(c(2.0, 0.0), 1.0).unwrap();
        assert!(matches!(ring_modulus(&RingSpec::new(a, b, 0.02)), Err(DilatationError::NotARing(_))));
    }


    #[test]
    fn power_map_distorts_modulus_by_at_most_k() {
        use crate::extensions::PowerMap;
        let inner = Region::disk(c(0.3, 0.0), 0.5).unwrap();
        let before = ring_modulus(&RingSpec::new(inner.clone(), Region::disk(c(0.0, 0.0), 2.0).unwrap().complement(), 0.02).numeric())
            .unwrap()
            .modulus;
        for beta in [1.5, 2.0, 3.0] {
            let f = PowerMap::new(beta).unwrap();
            let img: Vec<Complex64> = inner.boundary_samples(256).unwrap().iter().map(|&z| f.apply(z).unwrap()).collect();
            let outer = Region::disk(c(0.0, 0.0), 2f64.powf(beta)).unwrap().complement();
            let after = ring_modulus(&RingSpec::new(Region::polygon(img).unwrap(), outer, 0.02).numeric()).unwrap().modulus;
            let k = f.dilatation();
            let ratio = after / before;
            assert!(ratio <= 1.02 * k && ratio >= 0.98 / k, "beta {beta}: ratio {ratio}");
        }
    }
}
