use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extensions::{orient, PLMap};

use super::DilatationError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DilatationMethod {
    AffineExact,
    FiniteDifference { step: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationReport {
    pub max_k: f64,
    /// One value per triangle or node.
    pub per_element: Vec<f64>,
    pub worst: Option<usize>,
    /// Elements where the map reverses orientation; their entry in
    /// `per_element` is the dilatation of the reversed map.
    pub reversed: Vec<usize>,
    pub method: DilatationMethod,
}

/// `(|a| + |b|) / ||a| - |b||`, infinite when `|a| = |b|`.
pub fn dilatation_from(a: Complex64, b: Complex64) -> f64 {
    let (p, q) = (a.norm(), b.norm());
    if p == q {
        return f64::INFINITY;
    }
    (p + q) / (p - q).abs()
}

/// Coefficients of the affine map `z ↦ az + b z̄ + c` taking `src` to `img`.
pub fn affine_coefficients(src: [Complex64; 3], img: [Complex64; 3]) -> Option<(Complex64, Complex64)> {
    let (e1, e2) = (src[1] - src[0], src[2] - src[0]);
    let (f1, f2) = (img[1] - img[0], img[2] - img[0]);
    let det = e1 * e2.conj() - e2 * e1.conj();
    if det.norm() == 0.0 {
        return None;
    }
    let a = (f1 * e2.conj() - f2 * e1.conj()) / det;
    let b = (f2 * e1 - f1 * e2) / det;
    Some((a, b))
}

fn report(per: Vec<f64>, reversed: Vec<usize>, method: DilatationMethod) -> DilatationReport {
    let mut worst = None;
    let mut max_k = 1.0f64;
    for (i, &k) in per.iter().enumerate() {
        if worst.is_none() || k > max_k {
            max_k = k;
            worst = Some(i);
        }
    }
    DilatationReport { max_k, per_element: per, worst, reversed, method }
}

/// Exact dilatation of every affine piece of a PL map.
pub fn pl_dilatation(m: &PLMap) -> Result<DilatationReport, DilatationError> {
    let per: Vec<(f64, bool)> = (0..m.len())
        .into_par_iter()
        .map(|t| {
            let p = m.source_triangle(t);
            if !(orient(p[0], p[1], p[2]) > 0.0) {
                return Err(DilatationError::DegenerateTriangle { triangle: t });
            }
            let (a, b) = affine_coefficients(p, m.image_triangle(t)).ok_or(DilatationError::DegenerateTriangle { triangle: t })?;
            Ok((dilatation_from(a, b), b.norm() >= a.norm()))
        })
        .collect::<Result<_, _>>()?;
    let reversed = per.iter().enumerate().filter(|(_, x)| x.1).map(|(i, _)| i).collect();
    Ok(report(per.into_iter().map(|x| x.0).collect(), reversed, DilatationMethod::AffineExact))
}

/// Default central-difference step at `z`.
pub fn default_step(z: Complex64) -> f64 {
    1e-5 * z.norm().max(1e-3)
}

/// `(f_z, f_z̄)` by central differences.
pub fn wirtinger(f: &impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let fx = (f(z + h) - f(z - h)) / (2.0 * h);
    let fy = (f(z + i * h) - f(z - i * h)) / (2.0 * h);
    ((fx - i * fy) * 0.5, (fx + i * fy) * 0.5)
}

/// Pointwise dilatation of an orientation-preserving map by central
/// differences. `step` overrides the default `1e-5 · max(|z|, 1e-3)`.
pub fn numeric_beltrami(
    f: impl Fn(Complex64) -> Complex64 + Sync,
    nodes: &[Complex64],
    step: Option<f64>,
) -> Result<DilatationReport, DilatationError> {
    let per: Vec<(f64, bool)> = nodes
        .par_iter()
        .map(|&z| {
            let h = step.unwrap_or_else(|| default_step(z));
            let (a, b) = wirtinger(&f, z, h);
            (dilatation_from(a, b), b.norm() > a.norm())
        })
        .collect();
    let reversed: Vec<usize> = per.iter().enumerate().filter(|(_, x)| x.1).map(|(i, _)| i).collect();
    if reversed.len() * 100 > nodes.len() {
        return Err(DilatationError::StepTooLarge { reversed: reversed.len(), nodes: nodes.len() });
    }
    Ok(report(per.into_iter().map(|x| x.0).collect(), reversed, DilatationMethod::FiniteDifference { step }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn single(img: [Complex64; 3]) -> PLMap {
        PLMap {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            triangles: vec![[0, 1, 2]],
            image_vertices: img.to_vec(),
            depth: 0,
            period: None,
        }
    }

    #[test]
    fn vertical_stretch() {
        let r = pl_dilatation(&single([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)])).unwrap();
        assert!((r.max_k - 2.0).abs() < 1e-14);
        let (a, b) = affine_coefficients([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert!((a - c(1.5, 0.0)).norm() < 1e-15 && (b - c(-0.5, 0.0)).norm() < 1e-15);
        let id = pl_dilatation(&single([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        assert_eq!(id.max_k, 1.0);
        let flip = pl_dilatation(&single([c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(flip.reversed, vec![0]);
    }

    #[test]
    fn finite_differences() {
        let nodes: Vec<Complex64> = (0..20).map(|k| c(0.3 + 0.1 * k as f64, -0.7 + 0.05 * k as f64)).collect();
        let r = numeric_beltrami(|z| z + z.conj() * 0.5, &nodes, None).unwrap();
        for k in &r.per_element {
            assert!((k - 3.0).abs() < 1e-6);
        }
        let mob = |z: Complex64| (z * 2.0 + c(1.0, 0.0)) / (z + c(3.0, 1.0));
        let r = numeric_beltrami(mob, &nodes, None).unwrap();
        assert!((r.max_k - 1.0).abs() < 1e-6);
        assert!(numeric_beltrami(|z| z.conj(), &nodes, None).is_err());
    }


    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| c(x, y))
    }

    proptest! {
        #[test]
        fn affine_pieces_match_finite_differences(
            a in cplx(),
            mu in (0.0..0.9f64, 0.0..TAU),
            corner in cplx(),
            legs in (0.2..2.0f64, 0.2..2.0f64, 0.0..TAU, 0.3..2.8f64),
        ) {
            prop_assume!(a.norm() > 0.1);
            let b = a * Complex64::from_polar(mu.0, mu.1);
            let (r1, r2, phi, psi) = legs;
            let src = [corner, corner + Complex64::from_polar(r1, phi), corner + Complex64::from_polar(r2, phi + psi)];
            let f = move |z: Complex64| a * z + b * z.conj();
            let m = PLMap {
                vertices: src.to_vec(),
                triangles: vec![[0, 1, 2]],
                image_vertices: src.iter().map(|&z| f(z)).collect(),
                depth: 0,
                period: None,
            };
            let exact = pl_dilatation(&m).unwrap().max_k;
            let centroid = (src[0] + src[1] + src[2]) / 3.0;
            let fd = numeric_beltrami(f, &[centroid], None).unwrap().max_k;
            prop_assert!((exact - fd).abs() <= 1e-6 * exact, "{} vs {}", exact, fd);
            prop_assert!((exact - dilatation_from(a, b)).abs() <= 1e-9 * exact);
        }
    }
}
