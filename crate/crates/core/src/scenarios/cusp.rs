use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::extensions::ba_extend_fn;

use super::ScenarioError;

/// Straightening of the polynomial cusp `{x + i x^α : 0 < x ≤ 1}` onto the
/// semicircle `x² + (y − ½)² = ¼, x ≥ 0`.
///
/// In the chart `φ(z) = 1/z̄` the cusp becomes the graph of `h`, and the map
/// `(t, y) ↦ (H(t), y / h(t))` sends that graph to the line `Im = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspMap {
    pub alpha: f64,
}

impl CuspMap {
    pub fn new(alpha: f64) -> Result<Self, ScenarioError> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(ScenarioError::AlphaOutOfRange(alpha));
        }
        Ok(CuspMap { alpha })
    }

    /// `Re φ(x + i x^α) = 1 / (x (1 + x^{2α−2}))`, decreasing on `(0, 1]`.
    pub fn t(&self, x: f64) -> f64 {
        1.0 / (x * (1.0 + x.powf(2.0 * self.alpha - 2.0)))
    }

    /// Inverse of `t` on `[1/2, ∞)`, by bisection on `[1/(2t), 1/t]`.
    pub fn s(&self, t: f64) -> f64 {
        if t <= 0.5 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.5 / t, (1.0 / t).min(1.0));
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.t(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Height of the cusp image: `|t| s(|t|)^{α−1}`, and `1/2` on `(−1/2, 1/2)`.
    pub fn h(&self, t: f64) -> f64 {
        let a = t.abs();
        if a < 0.5 {
            0.5
        } else {
            a * self.s(a).powf(self.alpha - 1.0)
        }
    }

    /// Antiderivative of `1/h` with `H(0) = 0`.
    ///
    /// Substituting `t = t(ξ)` turns `∫ dt / h` into an integral of
    /// `ξ^{−α} + (2α−2) ξ^{α−2} / (1 + ξ^{2α−2})`, which has a closed form.
    pub fn big_h(&self, t: f64) -> f64 {
        let a = t.abs();
        let v = if a <= 0.5 {
            2.0 * a
        } else {
            let s = self.s(a);
            let p = self.alpha - 1.0;
            1.0 + (s.powf(-p) - 1.0) / p + FRAC_PI_2 - 2.0 * s.powf(p).atan()
        };
        v.copysign(t)
    }

    /// Beurling–Ahlfors extension of `H` to the closed upper half-plane.
    pub fn ba(&self, z: Complex64) -> Complex64 {
        ba_extend_fn(|t| self.big_h(t), z)
    }

    /// The straightening map in the `φ` chart: fixes the real line setwise
    /// and sends the graph of `h` onto `Im = 1`.
    pub fn straighten(&self, w: Complex64) -> Complex64 {
        let (x, y) = (w.re, w.im);
        if y < 0.0 {
            return self.ba(w.conj()).conj();
        }
        let hx = self.h(x);
        if y <= hx {
            Complex64::new(self.big_h(x), y / hx)
        } else {
            self.ba(Complex64::new(x, y - hx)) + Complex64::new(0.0, 1.0)
        }
    }

    /// `φ⁻¹ ∘ straighten ∘ φ` with `φ(z) = 1/z̄`; fixes `0`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        if z == Complex64::new(0.0, 0.0) {
            return z;
        }
        let w = self.straighten(z.conj().inv());
        w.conj().inv()
    }

    /// Point of the cusp over `x`.
    pub fn cusp_point(&self, x: f64) -> Complex64 {
        Complex64::new(x, x.powf(self.alpha))
    }

    /// Lipschitz bound `1 + 4(α − 1)` for `h`.
    pub fn lipschitz_bound(&self) -> f64 {
        1.0 + 4.0 * (self.alpha - 1.0)
    }

    /// Range of `t · s(t)` over a log grid on `[1/2, t_max]`; the sandwich
    /// `1/(2t) ≤ s(t) ≤ 1/t` puts it inside `[1/2, 1]`.
    pub fn sandwich_range(&self, t_max: f64, n: usize) -> (f64, f64) {
        let (a, b) = (0.5f64.ln(), t_max.ln());
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
            let t = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
            let v = t * self.s(t);
            (lo.min(v), hi.max(v))
        })
    }

    /// Largest `|h'|` by central differences on `[−t_max, t_max]`, skipping
    /// the corners at `±1/2`.
    pub fn max_slope(&self, t_max: f64, n: usize) -> f64 {
        (0..n)
            .map(|k| -t_max + 2.0 * t_max * (k as f64 + 0.5) / n as f64)
            .filter(|t| (t.abs() - 0.5).abs() > 1e-4)
            .map(|t| {
                let d = 1e-6 * t.abs().max(1.0);
                ((self.h(t + d) - self.h(t - d)) / (2.0 * d)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest normalized distance from the images of `n` cusp points to
    /// the target semicircle, plus how many land on the wrong half.
    pub fn semicircle_deviation(&self, n: usize) -> (f64, usize) {
        let centre = Complex64::new(0.0, 0.5);
        let mut worst = 0.0f64;
        let mut wrong_side = 0;
        for k in 1..=n {
            let w = self.apply(self.cusp_point(k as f64 / n as f64));
            worst = worst.max(((w - centre).norm() - 0.5).abs());
            if w.re < -1e-12 {
                wrong_side += 1;
            }
        }
        (worst, wrong_side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn inverse_and_endpoint() {
        for alpha in [1.5, 2.0, 3.0] {
            let m = CuspMap::new(alpha).unwrap();
            assert_eq!(m.t(1.0), 0.5);
            assert!((m.s(0.5) - 1.0).abs() < 1e-12);
            for x in [0.9, 0.3, 0.01, 1e-4] {
                assert!((m.s(m.t(x)) / x - 1.0).abs() < 1e-11);
            }
        }
        assert!(CuspMap::new(1.0).is_err());
    }

    #[test]
    fn closed_form_antiderivative_matches_quadrature() {
        for alpha in [1.5, 2.0, 3.0] {
            let m = CuspMap::new(alpha).unwrap();
            for t in [0.7, 2.0, 15.0] {
                let q = 1.0 + simpson(|u| 1.0 / m.h(u), 0.5, t, 4000);
                assert!((m.big_h(t) - q).abs() < 1e-7 * q, "alpha {alpha} t {t}");
                assert_eq!(m.big_h(-t), -m.big_h(t));
            }
            assert_eq!(m.big_h(0.25), 0.5);
        }
    }

    #[test]
    fn maps_cusp_onto_semicircle() {
        let m = CuspMap::new(2.0).unwrap();
        let (dev, wrong) = m.semicircle_deviation(50);
        assert!(dev < 1e-9 && wrong == 0);
        // x = 1 lands on the top right of the semicircle
        assert!((m.apply(c(1.0, 1.0)) - c(0.5, 0.5)).norm() < 1e-12);
        // the real axis is preserved
        let w = m.apply(c(0.3, 0.0));
        assert!(w.im.abs() < 1e-12 && w.re > 0.0);
    }

    #[test]
    fn straighten_is_continuous_across_pieces() {
        let m = CuspMap::new(3.0).unwrap();
        for x in [-4.0, -0.2, 0.8, 6.0] {
            let hx = m.h(x);
            let below = m.straighten(c(x, hx * (1.0 - 1e-9)));
            let above = m.straighten(c(x, hx * (1.0 + 1e-9)));
            assert!((below - above).norm() < 1e-6);
            let a = m.straighten(c(x, 1e-10));
            let b = m.straighten(c(x, -1e-10));
            assert!((a - b).norm() < 1e-6);
        }
    }
}
