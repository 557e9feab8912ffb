use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::point::{serde_complex, ExtPoint};
use super::GeomError;

/// `z ↦ (a z + b) / (c z + d)`, optionally applied to `conj(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    #[serde(with = "serde_complex")]
    pub a: Complex64,
    #[serde(with = "serde_complex")]
    pub b: Complex64,
    #[serde(with = "serde_complex")]
    pub c: Complex64,
    #[serde(with = "serde_complex")]
    pub d: Complex64,
    pub conjugate_first: bool,
}

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl MobiusMap {
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        conjugate_first: bool,
    ) -> Result<Self, GeomError> {
        let m = MobiusMap { a, b, c, d, conjugate_first };
        if !m.is_nondegenerate() {
            return Err(GeomError::DegenerateMobius);
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        MobiusMap { a: cx(1.0), b: cx(0.0), c: cx(0.0), d: cx(1.0), conjugate_first: false }
    }

    /// `z ↦ 1 / conj(z)`, the inversion in the unit circle.
    pub fn inversion() -> Self {
        MobiusMap { a: cx(0.0), b: cx(1.0), c: cx(1.0), d: cx(0.0), conjugate_first: true }
    }

    /// `z ↦ 1 / (z − p)`: sends `p` to infinity.
    pub fn pole_at(p: Complex64) -> Self {
        MobiusMap { a: cx(0.0), b: cx(1.0), c: cx(1.0), d: -p, conjugate_first: false }
    }

    /// `z ↦ s z + t`.
    pub fn similarity(s: Complex64, t: Complex64) -> Self {
        MobiusMap { a: s, b: t, c: cx(0.0), d: cx(1.0), conjugate_first: false }
    }

    pub fn is_nondegenerate(&self) -> bool {
        let det = self.a * self.d - self.b * self.c;
        let scale = [self.a, self.b, self.c, self.d]
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        det.norm() > 1e-12 * scale * scale
    }

    pub fn apply(&self, z: ExtPoint) -> ExtPoint {
        let zero = Complex64::new(0.0, 0.0);
        match z {
            ExtPoint::Infinity => {
                if self.c == zero {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a / self.c)
                }
            }
            ExtPoint::Finite(z) => {
                let z = if self.conjugate_first { z.conj() } else { z };
                let num = self.a * z + self.b;
                let den = self.c * z + self.d;
                let tol = 1e-15 * (self.c.norm() * z.norm() + self.d.norm());
                if den.norm() <= tol {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(num / den)
                }
            }
        }
    }

    /// Applies the map to a finite point whose image is known to be finite.
    pub fn apply_finite(&self, z: Complex64) -> Option<Complex64> {
        self.apply(ExtPoint::Finite(z)).finite()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (oa, ob, oc, od) = if self.conjugate_first {
            (other.a.conj(), other.b.conj(), other.c.conj(), other.d.conj())
        } else {
            (other.a, other.b, other.c, other.d)
        };
        MobiusMap {
            a: self.a * oa + self.b * oc,
            b: self.a * ob + self.b * od,
            c: self.c * oa + self.d * oc,
            d: self.c * ob + self.d * od,
            conjugate_first: self.conjugate_first ^ other.conjugate_first,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        let (a, b, c, d) = (self.d, -self.b, -self.c, self.a);
        if self.conjugate_first {
            MobiusMap { a: a.conj(), b: b.conj(), c: c.conj(), d: d.conj(), conjugate_first: true }
        } else {
            MobiusMap { a, b, c, d, conjugate_first: false }
        }
    }
}

/// Free-function form of [`MobiusMap::apply`].
pub fn apply_mobius(t: &MobiusMap, z: ExtPoint) -> ExtPoint {
    t.apply(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{cross_ratio, Metric};

    #[test]
    fn identity_and_pole() {
        let z = ExtPoint::new(0.25, -2.0);
        assert_eq!(MobiusMap::identity().apply(z), z);
        let recip = MobiusMap::new(cx(0.0), cx(1.0), cx(1.0), cx(0.0), false).unwrap();
        assert_eq!(recip.apply(ExtPoint::new(0.0, 0.0)), ExtPoint::Infinity);
        assert_eq!(recip.apply(ExtPoint::Infinity), ExtPoint::new(0.0, 0.0));
    }

    #[test]
    fn inversion_of_cusp_graph() {
        let alpha: f64 = 2.5;
        for &x in &[0.1f64, 0.5, 0.9] {
            let y = x.powf(alpha);
            let den = x * x + x.powf(2.0 * alpha);
            let w = MobiusMap::inversion().apply(ExtPoint::new(x, y)).finite().unwrap();
            assert!((w.re - x / den).abs() < 1e-12);
            assert!((w.im - y / den).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_rejected() {
        assert!(MobiusMap::new(cx(1.0), cx(2.0), cx(2.0), cx(4.0), false).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let s = MobiusMap::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(3.0, -1.0),
            true,
        )
        .unwrap();
        let t = MobiusMap::pole_at(Complex64::new(0.3, 0.7));
        let z = ExtPoint::new(-1.1, 0.4);
        let lhs = s.compose(&t).apply(z).finite().unwrap();
        let rhs = s.apply(t.apply(z)).finite().unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        let back = s.inverse().apply(s.apply(z)).finite().unwrap();
        assert!((back - z.finite().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn cross_ratio_of_images() {
        let t = MobiusMap::new(
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(0.3, -0.2),
            Complex64::new(1.0, 1.0),
            false,
        )
        .unwrap();
        let pts: Vec<ExtPoint> = (0..4).map(|k| t.apply(ExtPoint::new(k as f64, 0.0))).collect();
        let r = cross_ratio(pts[0], pts[1], pts[2], pts[3], Metric::Euclidean).unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-9);
    }


    use proptest::prelude::*;

    fn coef() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
    }

    proptest! {
        #[test]
        fn chordal_cross_ratio_is_invariant(
            m in prop::array::uniform4(coef()),
            conj in any::<bool>(),
            q in prop::array::uniform4(coef()),
        ) {
            prop_assume!((m[0] * m[3] - m[1] * m[2]).norm() > 0.5);
            let t = MobiusMap::new(m[0], m[1], m[2], m[3], conj).unwrap();
            let sep = (0..4).all(|i| (i + 1..4).all(|j| (q[i] - q[j]).norm() > 0.05));
            prop_assume!(sep);
            let pts: Vec<ExtPoint> = q.iter().map(|&z| ExtPoint::Finite(z)).collect();
            let img: Vec<ExtPoint> = pts.iter().map(|&z| t.apply(z)).collect();
            let before = cross_ratio(pts[0], pts[1], pts[2], pts[3], Metric::Chordal).unwrap();
            let after = cross_ratio(img[0], img[1], img[2], img[3], Metric::Chordal).unwrap();
            prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0), "{} vs {}", before, after);
        }
    }
}
