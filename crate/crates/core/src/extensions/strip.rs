use num_complex::Complex64;

use super::dyadic::dyadic_mesh;
use super::homeo::{BoundaryHomeo, Carrier};
use super::plmap::PLMap;
use super::ExtensionError;

/// Corners of the image trapezoid over the unit cell `[n, n + 1]`.
#[derive(Clone, Copy, Debug)]
struct Trapezoid {
    ll: Complex64,
    lr: Complex64,
    ul: Complex64,
    ur: Complex64,
}

impl Trapezoid {
    /// Inverse of the map taking the trapezoid onto the unit square, linear
    /// on the two triangles cut by the lower-left to upper-right diagonal.
    fn from_square(&self, x: f64, y: f64) -> Complex64 {
        if y <= x {
            self.ll + (self.lr - self.ll) * (x - y) + (self.ur - self.ll) * y
        } else {
            self.ll + (self.ur - self.ul) * x + (self.ul - self.ll) * y
        }
    }
}

/// Strip extension for increasing `h0` on `ℝ × {0}` and `h1` on `ℝ × {1}`
/// (given as real parts) over the window `[a, b]`.
///
/// Both maps are read on `[a, b + 1]`; every trapezoid must have corner
/// distances in `[1/spread, spread]`.
pub(crate) fn strip_mesh(
    h0: &dyn Fn(f64) -> f64,
    h1: &dyn Fn(f64) -> f64,
    a: i64,
    b: i64,
    depth: u32,
    spread: f64,
    period: Option<u32>,
) -> Result<PLMap, ExtensionError> {
    if depth < 1 || b <= a {
        return Err(ExtensionError::InvalidInput("need depth >= 1 and a nonempty window".into()));
    }
    let traps: Vec<Trapezoid> = (a..=b)
        .map(|n| {
            let (x0, x1) = (n as f64, (n + 1) as f64);
            Trapezoid {
                ll: Complex64::new(h0(x0), 0.0),
                lr: Complex64::new(h0(x1), 0.0),
                ul: Complex64::new(h1(x0), 1.0),
                ur: Complex64::new(h1(x1), 1.0),
            }
        })
        .collect();
    for (k, t) in traps.iter().enumerate() {
        let n = a + k as i64;
        if !(t.lr.re > t.ll.re) || !(t.ur.re > t.ul.re) {
            return Err(ExtensionError::NotIncreasing { index: k });
        }
        let pts = [t.ll, t.lr, t.ur, t.ul];
        for i in 0..4 {
            for j in i + 1..4 {
                let d = (pts[i] - pts[j]).norm();
                if !(d >= 1.0 / spread && d <= spread) {
                    return Err(ExtensionError::CellDistortionTooLarge { cell: n, distance: d });
                }
            }
        }
    }
    let trap = |x: f64| -> (i64, &Trapezoid) {
        let n = (x.floor() as i64).clamp(a, b);
        (n, &traps[(n - a) as usize])
    };
    // ψ∘h on each line, so that integers are fixed
    let w0 = |x: f64| {
        let (n, t) = trap(x);
        n as f64 + (h0(x) - t.ll.re) / (t.lr.re - t.ll.re)
    };
    let w1 = |x: f64| {
        let (n, t) = trap(x);
        n as f64 + (h1(x) - t.ul.re) / (t.ur.re - t.ul.re)
    };
    let lower = dyadic_mesh(&w0, a, b, depth, period)
        .map_vertices(|z| Complex64::new(z.re, 0.5 * z.im), |w| Complex64::new(w.re, 0.5 * w.im));
    let upper = dyadic_mesh(&w1, a, b, depth, period)
        .map_vertices(|z| Complex64::new(z.re, 1.0 - 0.5 * z.im), |w| Complex64::new(w.re, 1.0 - 0.5 * w.im))
        .reversed();
    let glued = lower.glue(&upper, 1e-12);
    // make every image triangle lie on one side of its column diagonal
    let cut = glued.cut_images(|tri, w| {
        let cx = (tri[0].re + tri[1].re + tri[2].re) / 3.0;
        (w.re - cx.floor()) - w.im
    });
    let image_vertices = cut
        .image_vertices
        .iter()
        .map(|&w| {
            let (n, t) = trap(w.re);
            let x = (w.re - n as f64).clamp(0.0, 1.0);
            t.from_square(x, w.im.clamp(0.0, 1.0))
        })
        .collect();
    Ok(PLMap { image_vertices, ..cut })
}

/// Extends a pair of increasing maps of `ℝ × {0}` and `ℝ × {1}` to the strip
/// over the integer window `[a, b]`.
pub fn trapezoid_strip_extend(
    bottom: &BoundaryHomeo,
    top: &BoundaryHomeo,
    window: (i64, i64),
    depth: u32,
    spread: f64,
) -> Result<PLMap, ExtensionError> {
    match (bottom.carrier, top.carrier) {
        (Carrier::Line { y: y0 }, Carrier::Line { y: y1 }) if y0 == 0.0 && y1 == 1.0 => {}
        _ => return Err(ExtensionError::InvalidCarrier),
    }
    let (a, b) = window;
    for h in [bottom, top] {
        h.eval_line(a as f64)?;
        h.eval_line((b + 1) as f64)?;
    }
    let period = match (bottom.period, top.period) {
        (Some(p), Some(q)) if p == q => Some(p),
        _ => None,
    };
    let f0 = |x: f64| bottom.eval_line(x).expect("inside the checked range");
    let f1 = |x: f64| top.eval_line(x).expect("inside the checked range");
    strip_mesh(&f0, &f1, a, b, depth, spread, period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn line(f: impl Fn(f64) -> f64, y: f64) -> BoundaryHomeo {
        BoundaryHomeo::line_from_fn(f, y, -1.0, 5.0, 6 * 64, None).unwrap()
    }

    #[test]
    fn identity_pair() {
        let m = trapezoid_strip_extend(&line(|x| x, 0.0), &line(|x| x, 1.0), (0, 3), 4, 4.0).unwrap();
        for (z, w) in m.vertices.iter().zip(&m.image_vertices) {
            assert!((z - w).norm() < 1e-12);
        }
        assert!(m.orientation_failures().is_empty());
        assert_eq!(m.find_image_overlap(), None);
    }

    #[test]
    fn boundary_is_reproduced() {
        let f0 = |x: f64| x + 0.15 * (x * 2.0).sin();
        let f1 = |x: f64| x + 0.4 + 0.1 * (x * 3.0).cos();
        let (b0, b1) = (line(f0, 0.0), line(f1, 1.0));
        let m = trapezoid_strip_extend(&b0, &b1, (0, 3), 5, 4.0).unwrap();
        for (z, w) in m.vertices.iter().zip(&m.image_vertices) {
            if z.im == 0.0 {
                assert!((w - c(b0.eval_line(z.re).unwrap(), 0.0)).norm() < 1e-9);
            }
            if z.im == 1.0 {
                assert!((w - c(b1.eval_line(z.re).unwrap(), 1.0)).norm() < 1e-9);
            }
        }
        assert!(m.orientation_failures().is_empty());
        assert_eq!(m.find_image_overlap(), None);
    }

    #[test]
    fn spread_is_enforced() {
        let r = trapezoid_strip_extend(&line(|x| x, 0.0), &line(|x| x + 3.0, 1.0), (0, 2), 3, 2.0);
        assert!(matches!(r, Err(ExtensionError::CellDistortionTooLarge { cell: 0, .. })));
    }
}
