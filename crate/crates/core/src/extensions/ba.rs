use num_complex::Complex64;

use super::homeo::BoundaryHomeo;
use super::ExtensionError;

/// Simpson nodes on `[0, 1]`.
pub const BA_NODES: usize = 129;

/// Beurling–Ahlfors extension of `h` evaluated at `z` with `Im z >= 0`.
pub fn ba_extend_fn(h: impl Fn(f64) -> f64, z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return Complex64::new(h(x), 0.0);
    }
    let n = BA_NODES - 1;
    let (mut su, mut sv) = (0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (p, q) = (h(x + t * y), h(x - t * y));
        su += w * (p + q);
        sv += w * (p - q);
    }
    let scale = 1.0 / (3.0 * n as f64);
    Complex64::new(0.5 * su * scale, 0.5 * sv * scale)
}

/// Beurling–Ahlfors extension of a sampled line homeomorphism.
pub fn ba_extend(h: &BoundaryHomeo, points: &[Complex64]) -> Result<Vec<Complex64>, ExtensionError> {
    if !h.is_line() {
        return Err(ExtensionError::InvalidCarrier);
    }
    let (lo, hi) = h.range();
    points
        .iter()
        .map(|&z| {
            if z.im < 0.0 {
                return Err(ExtensionError::InvalidInput("evaluation point below the real axis".into()));
            }
            if h.period.is_none() && (z.re - z.im < lo - 1e-12 || z.re + z.im > hi + 1e-12) {
                return Err(ExtensionError::QuadratureRangeExceeded { x: z.re, y: z.im });
            }
            Ok(ba_extend_fn(|t| h.eval_line(t).expect("range checked"), z))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn identity_and_doubling() {
        let id = BoundaryHomeo::line_from_fn(|x| x, 0.0, -10.0, 10.0, 20, None).unwrap();
        let dbl = BoundaryHomeo::line_from_fn(|x| 2.0 * x, 0.0, -10.0, 10.0, 20, None).unwrap();
        let pts = [c(0.3, 0.7), c(-2.0, 3.0), c(1.5, 0.0)];
        for (z, w) in pts.iter().zip(ba_extend(&id, &pts).unwrap()) {
            assert!((w - c(z.re, z.im / 2.0)).norm() < 1e-8);
        }
        for (z, w) in pts.iter().zip(ba_extend(&dbl, &pts).unwrap()) {
            assert!((w - c(2.0 * z.re, z.im)).norm() < 1e-8);
        }
        assert!(matches!(ba_extend(&id, &[c(9.0, 2.0)]), Err(ExtensionError::QuadratureRangeExceeded { .. })));
    }

    #[test]
    fn image_stays_in_upper_half_plane() {
        let h = BoundaryHomeo::line_from_fn(|x: f64| x + 0.3 * x.sin(), 0.0, -10.0, 10.0, 400, None).unwrap();
        let pts: Vec<Complex64> = (0..50).map(|k| c(-3.0 + 0.12 * k as f64, 0.05 + 0.07 * k as f64)).collect();
        for w in ba_extend(&h, &pts).unwrap() {
            assert!(w.im > 0.0);
        }
    }


    use proptest::prelude::*;

    proptest! {
        #[test]
        fn identity_boundary_halves_height(x in -3.0..3.0f64, y in 0.01..3.0f64) {
            let id = BoundaryHomeo::line_from_fn(|x| x, 0.0, -10.0, 10.0, 20, None).unwrap();
            let w = ba_extend(&id, &[c(x, y)]).unwrap()[0];
            prop_assert!((w - c(x, y / 2.0)).norm() < 1e-8);
        }
    }
}
