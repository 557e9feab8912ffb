use num_complex::Complex64;

use super::homeo::BoundaryHomeo;
use super::plmap::PLMap;
use super::ExtensionError;

/// Tolerance for `h(n) = n` at integers.
const ANCHOR_TOL: f64 = 1e-9;

/// Dyadic extension of `f` (increasing, `f(n) = n`) to `[a, b] × [0, 1]`.
///
/// The vertex `(k 2^-m, 2^-m)` goes to `(f(x), f(x + 2^-m) - f(x))`; between
/// levels `m` and `m + 1` each cell is cut into three triangles, and the last
/// level is joined to the real axis, where the map is `x ↦ f(x)`.
/// `f` is read on `[a, b + 1]`.
pub(crate) fn dyadic_mesh(f: &dyn Fn(f64) -> f64, a: i64, b: i64, depth: u32, period: Option<u32>) -> PLMap {
    let cells = (b - a) as usize;
    let fine = 1usize << depth;
    let step = 1.0 / fine as f64;
    // f on the finest lattice of [a, b + 1]
    let vals: Vec<f64> = (0..=(cells + 1) * fine).map(|i| f(a as f64 + step * i as f64)).collect();

    let mut vertices = Vec::new();
    let mut images = Vec::new();
    // row m holds the vertices (k 2^-m, 2^-m); row depth + 1 is the real axis
    let mut row_start = Vec::with_capacity(depth as usize + 2);
    for m in 0..=depth {
        row_start.push(vertices.len());
        let stride = fine >> m;
        let s = 1.0 / (1usize << m) as f64;
        for kk in 0..=(cells << m) {
            let i = kk * stride;
            vertices.push(Complex64::new(a as f64 + s * kk as f64, s));
            images.push(Complex64::new(vals[i], vals[i + stride] - vals[i]));
        }
    }
    row_start.push(vertices.len());
    for i in 0..=cells * fine {
        vertices.push(Complex64::new(a as f64 + step * i as f64, 0.0));
        images.push(Complex64::new(vals[i], 0.0));
    }

    let mut triangles = Vec::new();
    for m in 0..depth as usize {
        let (top, bot) = (row_start[m], row_start[m + 1]);
        for k in 0..(cells << m) {
            let (tl, tr) = (top + k, top + k + 1);
            let (bl, bm, br) = (bot + 2 * k, bot + 2 * k + 1, bot + 2 * k + 2);
            triangles.push([tl, bm, tr]);
            triangles.push([tl, bl, bm]);
            triangles.push([tr, bm, br]);
        }
    }
    let (top, bot) = (row_start[depth as usize], row_start[depth as usize + 1]);
    for k in 0..cells * fine {
        let (tl, tr, bl, br) = (top + k, top + k + 1, bot + k, bot + k + 1);
        triangles.push([tl, bl, br]);
        triangles.push([tl, br, tr]);
    }
    PLMap { vertices, triangles, image_vertices: images, depth, period }
}

/// Extends an increasing `h` on the real line with `h(n) = n` to the strip
/// `[a, b] × [0, 1]`, equal to the identity on the top edge.
///
/// Aperiodic data must cover `[a, b + 1]`.
pub fn dyadic_pl_extend(h: &BoundaryHomeo, window: (i64, i64), depth: u32) -> Result<PLMap, ExtensionError> {
    if !h.is_line() {
        return Err(ExtensionError::InvalidCarrier);
    }
    let (a, b) = window;
    if depth < 1 || b <= a {
        return Err(ExtensionError::InvalidInput("need depth >= 1 and a nonempty window".into()));
    }
    for n in a..=b + 1 {
        let v = h.eval_line(n as f64)?;
        if (v - n as f64).abs() > ANCHOR_TOL {
            return Err(ExtensionError::NotAnchored { n, value: v });
        }
    }
    // range is checked above at the integers, and h is defined in between
    let f = |x: f64| h.eval_line(x).expect("inside the checked range");
    Ok(dyadic_mesh(&f, a, b, depth, h.period))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use std::f64::consts::TAU;

    fn wobble(x: f64) -> f64 {
        x + 0.1 * (TAU * x).sin()
    }

    #[test]
    fn vertex_formula() {
        let h = BoundaryHomeo::line_from_fn(wobble, 0.0, 0.0, 1.0, 1 << 10, Some(1)).unwrap();
        let m = dyadic_pl_extend(&h, (0, 2), 4).unwrap();
        let find = |z: Complex64| m.vertices.iter().position(|&v| v == z).unwrap();
        let w = m.image_vertices[find(c(0.25, 0.25))];
        assert!((w - c(0.35, 0.15)).norm() < 1e-12);
        let w = m.image_vertices[find(c(0.5, 0.5))];
        assert!((w - c(0.5, 0.5)).norm() < 1e-12);
        assert!(m.validate().is_ok());
        assert!(m.orientation_failures().is_empty());
        assert_eq!(m.find_image_overlap(), None);
    }

    #[test]
    fn identity_is_fixed() {
        let h = BoundaryHomeo::line_from_fn(|x| x, 0.0, -3.0, 3.0, 6, None).unwrap();
        let m = dyadic_pl_extend(&h, (-3, 2), 5).unwrap();
        assert_eq!(m.vertices, m.image_vertices);
    }

    #[test]
    fn anchoring_is_checked() {
        let h = BoundaryHomeo::line_from_fn(|x| x + 0.2, 0.0, 0.0, 3.0, 6, None).unwrap();
        assert!(matches!(dyadic_pl_extend(&h, (0, 2), 3), Err(ExtensionError::NotAnchored { n: 0, .. })));
    }


    use crate::dilatation::pl_dilatation;
    use proptest::prelude::*;

    fn modes(a: [f64; 3]) -> impl Fn(f64) -> f64 {
        move |x| x + (1..=3).map(|j| a[j - 1] * (TAU * j as f64 * x).sin() / (TAU * j as f64)).sum::<f64>()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn periodic_wobble_extends_homeomorphically(a in prop::array::uniform3(-0.3..0.3f64)) {
            let f = modes(a);
            let h = BoundaryHomeo::line_from_fn(&f, 0.0, 0.0, 1.0, 1 << 10, Some(1)).unwrap();
            let m = dyadic_pl_extend(&h, (-2, 2), 5).unwrap();
            prop_assert!(m.orientation_failures().is_empty());
            prop_assert_eq!(m.find_image_overlap(), None);
            for (v, w) in m.vertices.iter().zip(&m.image_vertices) {
                if v.im == 0.0 {
                    prop_assert!((w.re - h.eval_line(v.re).unwrap()).abs() <= 1e-9 && w.im == 0.0);
                }
                if let Some(k) = m.vertices.iter().position(|&u| u == v + 1.0) {
                    prop_assert!((m.image_vertices[k] - w - 1.0).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn dilatation_stable_under_depth() {
        let h = BoundaryHomeo::line_from_fn(modes([0.6, -0.2, 0.1]), 0.0, 0.0, 1.0, 1 << 12, Some(1)).unwrap();
        let ks: Vec<f64> =
            (6..=9).map(|d| pl_dilatation(&dyadic_pl_extend(&h, (0, 1), d).unwrap()).unwrap().max_k).collect();
        for w in ks.windows(2) {
            assert!((w[1] - w[0]).abs() <= 0.05 * w[0], "{ks:?}");
        }
    }
}
