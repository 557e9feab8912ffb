use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::distortion::{qs_profile, DistortionProfile};
use crate::metric::DistanceMatrix;

use super::homeo::{BoundaryHomeo, Carrier, HomeoSample};
use super::lift::circle_lift_pair;
use super::plmap::PLMap;
use super::power::PowerMap;
use super::strip::strip_mesh;
use super::ExtensionError;

const RADIUS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusOptions {
    pub depth: u32,
    /// Corner distances of each arc (scaled by `N`) and of each lifted
    /// trapezoid must lie in `[1/spread, spread]`.
    pub spread: f64,
    /// Longest mesh edge in the lifted strip, as a fraction of the period,
    /// before descending to the annulus.
    pub max_edge: f64,
}

impl Default for AnnulusOptions {
    fn default() -> Self {
        AnnulusOptions { depth: 6, spread: 128.0, max_edge: 1.0 / 48.0 }
    }
}

/// Radius of the source circle and the common radius of its images.
fn circle_radii(h: &BoundaryHomeo) -> Result<(f64, f64), ExtensionError> {
    let Carrier::Circle { center, radius } = h.carrier else {
        return Err(ExtensionError::InvalidCarrier);
    };
    if center.norm() > RADIUS_TOL {
        return Err(ExtensionError::InvalidCarrier);
    }
    let r: Vec<f64> = h.samples.iter().map(|s| s.image.norm()).collect();
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > RADIUS_TOL * hi {
        return Err(ExtensionError::InvalidCarrier);
    }
    Ok((radius, 0.5 * (lo + hi)))
}

/// Same parameters, images multiplied by `s`.
fn scaled_images(h: &BoundaryHomeo, radius: f64, s: f64) -> Result<BoundaryHomeo, ExtensionError> {
    let samples = h.samples.iter().map(|p| HomeoSample { t: p.t, image: p.image * s }).collect();
    BoundaryHomeo::new(Carrier::Circle { center: Complex64::new(0.0, 0.0), radius }, samples, None)
}

/// Identity of the circle of radius `r`, sampled at `n` points.
fn circle_identity(r: f64, n: usize) -> BoundaryHomeo {
    BoundaryHomeo::circle_from_fn(|t| Complex64::from_polar(r, TAU * t), Complex64::new(0.0, 0.0), r, n)
        .expect("identity is a valid circle map")
}

/// Extension of `h` on `S(0,1) ∪ S(0,e^{2π/N})`, preserving each circle.
///
/// The boundary maps are lifted through `ψ(z) = e^{-2πiz/N}` to a periodic
/// pair on the strip, extended there, and pushed back down.
pub fn annulus_extend_unit(
    inner: &BoundaryHomeo,
    outer: &BoundaryHomeo,
    n: u32,
    opts: &AnnulusOptions,
) -> Result<PLMap, ExtensionError> {
    if n < 2 {
        return Err(ExtensionError::InvalidInput("N must be at least 2".into()));
    }
    let nf = n as f64;
    let big = (TAU / nf).exp();
    let (r_in, img_in) = circle_radii(inner)?;
    let (r_out, img_out) = circle_radii(outer)?;
    if (r_in - 1.0).abs() > RADIUS_TOL
        || (img_in - 1.0).abs() > RADIUS_TOL
        || (r_out - big).abs() > RADIUS_TOL * big
        || (img_out - big).abs() > RADIUS_TOL * big
    {
        return Err(ExtensionError::InvalidCarrier);
    }
    for arc in 0..n {
        let (t0, t1) = (arc as f64 / nf, (arc + 1) as f64 / nf);
        let pts = [inner.eval(t0)?, inner.eval(t1)?, outer.eval(t0)?, outer.eval(t1)?];
        for i in 0..4 {
            for j in i + 1..4 {
                let d = (pts[i] - pts[j]).norm() * nf;
                if !(d >= 1.0 / opts.spread && d <= opts.spread) {
                    return Err(ExtensionError::PreconditionSpread { arc, distance: d / nf });
                }
            }
        }
    }
    let pair = circle_lift_pair(inner, outer)?;
    let k = pair.k as f64;
    let lift0 = |t: f64| -nf * pair.f.lift(-t / nf);
    let lift1 = |t: f64| -nf * (pair.g.lift(-t / nf) + k);
    let strip = strip_mesh(&lift0, &lift1, 0, n as i64, opts.depth, opts.spread, Some(n))?;
    let limit = opts.max_edge * nf;
    let strip = strip.refine_edges(|a, b, wa, wb| (a - b).norm() > limit || (wa - wb).norm() > limit);
    Ok(descend(&strip, n))
}

/// Pushes a periodic strip mesh over `[0, N] × [0, 1]` to the annulus and
/// closes the seam.
fn descend(strip: &PLMap, n: u32) -> PLMap {
    let nf = n as f64;
    let psi = |z: Complex64| (Complex64::new(0.0, -TAU / nf) * z).exp();
    let key = |y: f64| (y * 1e12).round() as i64;
    let left: HashMap<i64, usize> = strip
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re.abs() < 1e-12)
        .map(|(i, z)| (key(z.im), i))
        .collect();
    let target: Vec<usize> = strip
        .vertices
        .iter()
        .enumerate()
        .map(|(i, z)| if (z.re - nf).abs() < 1e-12 { left.get(&key(z.im)).copied().unwrap_or(i) } else { i })
        .collect();
    let mut used = vec![false; strip.vertices.len()];
    let triangles: Vec<[usize; 3]> = strip.triangles.iter().map(|t| [target[t[0]], target[t[1]], target[t[2]]]).collect();
    for t in &triangles {
        for &i in t {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    let mut images = Vec::new();
    for i in 0..used.len() {
        if used[i] {
            remap[i] = vertices.len();
            vertices.push(psi(strip.vertices[i]));
            images.push(psi(strip.image_vertices[i]));
        }
    }
    PLMap {
        vertices,
        triangles: triangles.iter().map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]]).collect(),
        image_vertices: images,
        depth: strip.depth,
        period: None,
    }
}

/// Radial interpolation `re^{iθ} ↦ (1 + c(r - 1)) e^{iθ}` with
/// `c = (e^{2π/N} - 1)/(L - 1)`: identity on the unit circle, a scaling on
/// `S(0, L)` onto `S(0, e^{2π/N})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialInterp {
    pub factor: f64,
}

impl RadialInterp {
    pub fn new(l: f64, n: u32) -> Self {
        RadialInterp { factor: ((TAU / n as f64).exp() - 1.0) / (l - 1.0) }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return z;
        }
        z * ((1.0 + self.factor * (r - 1.0)) / r)
    }

    pub fn inverse(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return z;
        }
        z * ((1.0 + (r - 1.0) / self.factor) / r)
    }
}

/// Smallest `N >= 2` with `(M-1)/N <= L-1 < (M-1)/(N-1)`.
pub fn annulus_subdivisions(l: f64, m: f64) -> Result<u32, ExtensionError> {
    if !(l > 1.0 && l < m) {
        return Err(ExtensionError::RadiusOutOfRange { l, m });
    }
    Ok((((m - 1.0) / (l - 1.0)).ceil() as u32).max(2))
}

/// Extension of `h` from `S(0,1) ∪ S(0,L)` onto `S(0,1) ∪ S(0,L')`, for `L < M`.
pub fn annulus_extend_general(
    inner: &BoundaryHomeo,
    outer: &BoundaryHomeo,
    m: f64,
    opts: &AnnulusOptions,
) -> Result<PLMap, ExtensionError> {
    let (l, l_img) = circle_radii(outer)?;
    let n = annulus_subdivisions(l, m)?;
    let big = (TAU / n as f64).exp();
    let sigma = RadialInterp::new(l, n);
    let tau = RadialInterp::new(l_img, n);
    let outer_n = scaled_images(outer, big, big / l_img)?;
    let unit = annulus_extend_unit(inner, &outer_n, n, opts)?;
    Ok(unit.map_vertices(|z| sigma.inverse(z), |w| tau.inverse(w)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeOptions {
    pub annulus: AnnulusOptions,
    /// Use this splitting radius instead of the one derived from the
    /// empirical `η(4)`.
    pub r_override: Option<f64>,
    pub budget: usize,
    pub seed: u64,
}

impl Default for LargeOptions {
    fn default() -> Self {
        LargeOptions { annulus: AnnulusOptions::default(), r_override: None, budget: 2_000_000, seed: 0 }
    }
}

/// Extension over `A(0;1,L)` split into two meshed collars and a middle
/// ring carried by a rescaled power map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LargeAnnulusExtension {
    pub l: f64,
    pub l_prime: f64,
    /// Splitting radius; `None` when `L < 2` and a single mesh is used.
    pub r: Option<f64>,
    pub beta: Option<f64>,
    pub inner: PLMap,
    pub outer: Option<PLMap>,
    /// Empirical `η(4)` of the boundary map, when it was needed for `r`.
    pub eta4: Option<f64>,
}

impl LargeAnnulusExtension {
    /// The composite map at `z`, or `None` outside the closed annulus.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let rz = z.norm();
        match (self.r, self.beta, &self.outer) {
            (Some(r), Some(beta), Some(outer)) => {
                if rz <= r {
                    self.inner.eval(z)
                } else if rz >= self.l / r {
                    outer.eval(z)
                } else {
                    let p = PowerMap { beta };
                    p.apply(z / r).ok().map(|w| w * r)
                }
            }
            _ => self.inner.eval(z),
        }
    }

    /// Middle ring `r ↦ R (r/R)^β`, unless the annulus was too thin to split.
    pub fn middle(&self) -> Option<(f64, PowerMap)> {
        Some((self.r?, PowerMap { beta: self.beta? }))
    }
}

/// Empirical `η(4)`: running maximum of the quasisymmetry profile of `h` on
/// both circles, up to the bin of 4.
pub fn empirical_eta4(inner: &BoundaryHomeo, outer: &BoundaryHomeo, budget: usize, seed: u64) -> Result<f64, ExtensionError> {
    let pick = |h: &BoundaryHomeo| -> Vec<(Complex64, Complex64)> {
        let step = (h.samples.len() / 64).max(1);
        h.samples.iter().step_by(step).map(|s| (h.source(s.t), s.image)).collect()
    };
    let mut pts = pick(inner);
    pts.extend(pick(outer));
    let src = DistanceMatrix::from_complex(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let tgt = DistanceMatrix::from_complex(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let prof = qs_profile(&src, &tgt, budget, seed).map_err(|e| ExtensionError::InvalidInput(e.to_string()))?;
    prof.envelope()[DistortionProfile::bin_of(4.0)]
        .ok_or_else(|| ExtensionError::InvalidInput("no sample triple near ratio 4".into()))
}

/// Extension of `h` from `S(0,1) ∪ S(0,L)` onto `S(0,1) ∪ S(0,L')` when
/// `log L' / log L` lies in `[1/c0, c0]`.
pub fn annulus_extend_large(
    inner: &BoundaryHomeo,
    outer: &BoundaryHomeo,
    c0: f64,
    opts: &LargeOptions,
) -> Result<LargeAnnulusExtension, ExtensionError> {
    let (l, l_img) = circle_radii(outer)?;
    if !(l > 1.0 && l_img > 1.0) {
        return Err(ExtensionError::RadiusOutOfRange { l, m: f64::INFINITY });
    }
    let ratio = l_img.ln() / l.ln();
    if !(ratio >= 1.0 / c0 && ratio <= c0) {
        return Err(ExtensionError::LogRatioViolation { ratio, c0 });
    }
    if l < 2.0 {
        let mesh = annulus_extend_general(inner, outer, 2.0, &opts.annulus)?;
        return Ok(LargeAnnulusExtension { l, l_prime: l_img, r: None, beta: None, inner: mesh, outer: None, eta4: None });
    }
    let (r, eta4) = match opts.r_override {
        Some(r) => (r, None),
        None => {
            let eta4 = empirical_eta4(inner, outer, opts.budget, opts.seed)?;
            let l0 = if eta4 > 1.0 { 1.0 / (1.0 - 1.0 / eta4) } else { f64::INFINITY };
            (0.5 * (1.0 + l0.min(2.0).sqrt()), Some(eta4))
        }
    };
    if !(r > 1.0 && r * r < l.min(l_img)) {
        return Err(ExtensionError::RadiusOutOfRange { l: r, m: l.min(l_img).sqrt() });
    }
    let beta = (l_img / (r * r)).ln() / (l / (r * r)).ln();
    let count = inner.samples.len().max(outer.samples.len());

    let collar_in = annulus_extend_general(inner, &circle_identity(r, count), 2.0, &opts.annulus)?;

    // outer collar, rescaled so that its inner circle is the unit circle
    let (s, s_img) = (r / l, r / l_img);
    let inner_id = circle_identity(1.0, count);
    let outer_n = scaled_images(outer, r, s_img)?;
    let collar_out = annulus_extend_general(&inner_id, &outer_n, 2.0, &opts.annulus)?
        .map_vertices(|z| z / s, |w| w / s_img);

    Ok(LargeAnnulusExtension { l, l_prime: l_img, r: Some(r), beta: Some(beta), inner: collar_in, outer: Some(collar_out), eta4 })
}

/// Samples `f` on a polar grid of `A(0; r0, r1)` and triangulates it.
pub fn sample_annulus_map(
    r0: f64,
    r1: f64,
    radial: usize,
    angular: usize,
    f: impl Fn(Complex64) -> Complex64,
) -> PLMap {
    let mut vertices = Vec::with_capacity((radial + 1) * angular);
    for i in 0..=radial {
        let r = r0 * (r1 / r0).powf(i as f64 / radial as f64);
        for j in 0..angular {
            vertices.push(Complex64::from_polar(r, TAU * j as f64 / angular as f64));
        }
    }
    let id = |i: usize, j: usize| i * angular + j % angular;
    let mut triangles = Vec::with_capacity(2 * radial * angular);
    for i in 0..radial {
        for j in 0..angular {
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
        }
    }
    let image_vertices = vertices.iter().map(|&z| f(z)).collect();
    PLMap { vertices, triangles, image_vertices, depth: 0, period: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn unit_identity() {
        let n = 4;
        let big = (TAU / n as f64).exp();
        let m = annulus_extend_unit(&circle_identity(1.0, 128), &circle_identity(big, 128), n, &AnnulusOptions::default())
            .unwrap();
        for (z, w) in m.vertices.iter().zip(&m.image_vertices) {
            assert!((z - w).norm() < 1e-9);
        }
        assert!(m.validate().is_ok());
        assert!(m.orientation_failures().is_empty());
        assert_eq!(m.find_image_overlap(), None);
    }

    #[test]
    fn radial_interp_endpoints() {
        let s = RadialInterp::new(1.5, 2);
        let z = Complex64::from_polar(1.0, 0.7);
        assert!((s.apply(z) - z).norm() < 1e-15);
        let w = s.apply(z * 1.5);
        assert!((w.norm() - std::f64::consts::PI.exp()).abs() < 1e-12);
        assert!((s.inverse(w) - z * 1.5).norm() < 1e-12);
        assert_eq!(annulus_subdivisions(1.5, 2.0).unwrap(), 2);
        assert!(matches!(annulus_subdivisions(2.5, 2.0), Err(ExtensionError::RadiusOutOfRange { .. })));
    }

    #[test]
    fn general_identity_keeps_boundary() {
        let m = annulus_extend_general(&circle_identity(1.0, 64), &circle_identity(1.5, 64), 2.0, &AnnulusOptions::default())
            .unwrap();
        for (z, w) in m.vertices.iter().zip(&m.image_vertices) {
            let r = z.norm();
            if (r - 1.0).abs() < 1e-12 || (r - 1.5).abs() < 1e-12 {
                assert!((z - w).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn large_beta_closed_form() {
        let (l, lp) = (4f64.exp(), 8f64.exp());
        let outer = BoundaryHomeo::circle_from_fn(|t| Complex64::from_polar(lp, TAU * t), c(0.0, 0.0), l, 64).unwrap();
        let opts = LargeOptions { r_override: Some(2f64.sqrt()), ..LargeOptions::default() };
        let ext = annulus_extend_large(&circle_identity(1.0, 64), &outer, 3.0, &opts).unwrap();
        let want = (8.0 - 2f64.ln()) / (4.0 - 2f64.ln());
        assert!((ext.beta.unwrap() - want).abs() < 1e-12);
        assert!((want - 2.2097).abs() < 1e-4);
        let eq = annulus_extend_large(&circle_identity(1.0, 64), &circle_identity(l, 64), 2.0, &opts).unwrap();
        assert!((eq.beta.unwrap() - 1.0).abs() < 1e-12);
        let bad = annulus_extend_large(&circle_identity(1.0, 64), &outer, 1.5, &opts);
        assert!(matches!(bad, Err(ExtensionError::LogRatioViolation { .. })));
    }
}
