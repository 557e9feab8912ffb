use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::geom::serde_complex;

use super::ExtensionError;

/// Where a boundary homeomorphism lives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Carrier {
    /// Horizontal line `Im z = y`; parameters are real parts.
    Line { y: f64 },
    /// Circle; parameters are turns, so the source point is `center + radius·e^{2πit}`.
    Circle {
        #[serde(with = "serde_complex")]
        center: Complex64,
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomeoSample {
    pub t: f64,
    #[serde(with = "serde_complex")]
    pub image: Complex64,
}

/// A monotone boundary map known at samples and interpolated linearly in
/// between (in angle and radius for circles).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHomeo {
    pub carrier: Carrier,
    pub samples: Vec<HomeoSample>,
    /// For lines: `h(x + N) = h(x) + N`; samples then cover one period
    /// `[t0, t0 + N]` inclusive.
    pub period: Option<u32>,
    // unwrapped image angles (turns) for circles
    #[serde(skip)]
    lift: Vec<f64>,
}

impl BoundaryHomeo {
    pub fn new(carrier: Carrier, samples: Vec<HomeoSample>, period: Option<u32>) -> Result<Self, ExtensionError> {
        let mut h = BoundaryHomeo { carrier, samples, period, lift: Vec::new() };
        h.prepare()?;
        Ok(h)
    }

    /// Recomputes cached data and checks monotonicity; call after deserializing.
    pub fn prepare(&mut self) -> Result<(), ExtensionError> {
        let s = &self.samples;
        if s.len() < 2 {
            return Err(ExtensionError::InvalidInput("boundary map needs at least 2 samples".into()));
        }
        for i in 1..s.len() {
            if !(s[i].t > s[i - 1].t) {
                return Err(ExtensionError::NotIncreasing { index: i });
            }
        }
        match self.carrier {
            Carrier::Line { .. } => {
                for i in 1..s.len() {
                    if !(s[i].image.re > s[i - 1].image.re) {
                        return Err(ExtensionError::NotIncreasing { index: i });
                    }
                }
                if let Some(n) = self.period {
                    let span = s[s.len() - 1].t - s[0].t;
                    let rise = s[s.len() - 1].image.re - s[0].image.re;
                    if (span - n as f64).abs() > 1e-9 || (rise - n as f64).abs() > 1e-9 {
                        return Err(ExtensionError::InvalidInput(format!(
                            "periodic samples must cover exactly one period {n}"
                        )));
                    }
                }
            }
            Carrier::Circle { center, .. } => {
                if s[s.len() - 1].t - s[0].t >= 1.0 {
                    return Err(ExtensionError::InvalidInput("circle parameters must span less than one turn".into()));
                }
                let mut lift = Vec::with_capacity(s.len());
                let mut prev = (s[0].image - center).arg() / TAU;
                lift.push(prev);
                let mut winding = 0.0;
                for k in 1..=s.len() {
                    let z = s[k % s.len()].image - center;
                    let raw = z.arg() / TAU;
                    let mut step = raw - prev.rem_euclid(1.0);
                    step -= step.round();
                    winding += step;
                    prev += step;
                    if k < s.len() {
                        lift.push(prev);
                    }
                }
                if (winding + 1.0).abs() < 1e-6 {
                    return Err(ExtensionError::NotOrientationPreserving);
                }
                if (winding - 1.0).abs() > 1e-6 {
                    return Err(ExtensionError::InvalidInput(format!("image winds {winding:.3} times")));
                }
                for i in 1..lift.len() {
                    if !(lift[i] > lift[i - 1]) {
                        return Err(ExtensionError::NotIncreasing { index: i });
                    }
                }
                self.lift = lift;
            }
        }
        Ok(())
    }

    /// Samples `f` on `[lo, hi]` with `n` equal steps.
    pub fn line_from_fn(
        f: impl Fn(f64) -> f64,
        y: f64,
        lo: f64,
        hi: f64,
        n: usize,
        period: Option<u32>,
    ) -> Result<Self, ExtensionError> {
        let samples = (0..=n)
            .map(|i| {
                let t = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
                HomeoSample { t, image: Complex64::new(f(t), y) }
            })
            .collect();
        Self::new(Carrier::Line { y }, samples, period)
    }

    /// Samples `f` at the dyadic points `k 2^-depth` of `[lo, hi]`.
    pub fn line_dyadic(f: impl Fn(f64) -> f64, lo: i64, hi: i64, depth: u32) -> Result<Self, ExtensionError> {
        let n = ((hi - lo) as usize) << depth;
        let step = 1.0 / (1u64 << depth) as f64;
        let samples = (0..=n)
            .map(|i| {
                let t = lo as f64 + step * i as f64;
                HomeoSample { t, image: Complex64::new(f(t), 0.0) }
            })
            .collect();
        Self::new(Carrier::Line { y: 0.0 }, samples, None)
    }

    /// Samples a circle map given in turns: `f(t)` is the image of
    /// `center + radius·e^{2πit}`.
    pub fn circle_from_fn(
        f: impl Fn(f64) -> Complex64,
        center: Complex64,
        radius: f64,
        n: usize,
    ) -> Result<Self, ExtensionError> {
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                HomeoSample { t, image: f(t) }
            })
            .collect();
        Self::new(Carrier::Circle { center, radius }, samples, None)
    }

    pub fn is_line(&self) -> bool {
        matches!(self.carrier, Carrier::Line { .. })
    }

    /// Parameter interval covered by the samples.
    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Real part of the image of `x` on a line carrier.
    pub fn eval_line(&self, x: f64) -> Result<f64, ExtensionError> {
        let s = &self.samples;
        let (lo, hi) = self.range();
        let (x, shift) = match self.period {
            Some(n) => {
                let n = n as f64;
                let q = ((x - lo) / n).floor();
                (x - q * n, q * n)
            }
            None => (x, 0.0),
        };
        if !(x >= lo - 1e-12 && x <= hi + 1e-12) {
            return Err(ExtensionError::OutOfRange { x });
        }
        let i = s.partition_point(|p| p.t <= x).clamp(1, s.len() - 1);
        let (a, b) = (&s[i - 1], &s[i]);
        let lam = (x - a.t) / (b.t - a.t);
        Ok(a.image.re + lam * (b.image.re - a.image.re) + shift)
    }

    /// Continuous lift of the image angle, in turns, with `lift(t + 1) = lift(t) + 1`.
    pub fn lift(&self, t: f64) -> f64 {
        let s = &self.samples;
        let t0 = s[0].t;
        let q = (t - t0).floor();
        let u = t - q;
        let n = s.len();
        let i = s.partition_point(|p| p.t <= u);
        let (ta, la, tb, lb) = if i >= n {
            (s[n - 1].t, self.lift[n - 1], t0 + 1.0, self.lift[0] + 1.0)
        } else {
            (s[i - 1].t, self.lift[i - 1], s[i].t, self.lift[i])
        };
        la + (u - ta) / (tb - ta) * (lb - la) + q
    }

    fn radius_at(&self, t: f64) -> f64 {
        let Carrier::Circle { center, .. } = self.carrier else { return 0.0 };
        let s = &self.samples;
        let t0 = s[0].t;
        let u = t - (t - t0).floor();
        let n = s.len();
        let i = s.partition_point(|p| p.t <= u);
        let (ta, ra, tb, rb) = if i >= n {
            (s[n - 1].t, (s[n - 1].image - center).norm(), t0 + 1.0, (s[0].image - center).norm())
        } else {
            (s[i - 1].t, (s[i - 1].image - center).norm(), s[i].t, (s[i].image - center).norm())
        };
        ra + (u - ta) / (tb - ta) * (rb - ra)
    }

    /// Image point of parameter `t`.
    pub fn eval(&self, t: f64) -> Result<Complex64, ExtensionError> {
        match self.carrier {
            Carrier::Line { .. } => {
                let y = self.samples[0].image.im;
                Ok(Complex64::new(self.eval_line(t)?, y))
            }
            Carrier::Circle { center, .. } => {
                Ok(center + Complex64::from_polar(self.radius_at(t), TAU * self.lift(t)))
            }
        }
    }

    /// Source point of parameter `t`.
    pub fn source(&self, t: f64) -> Complex64 {
        match self.carrier {
            Carrier::Line { y } => Complex64::new(t, y),
            Carrier::Circle { center, radius } => center + Complex64::from_polar(radius, TAU * t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_line_eval() {
        let f = |x: f64| x + 0.1 * (TAU * x).sin();
        let h = BoundaryHomeo::line_from_fn(f, 0.0, 0.0, 1.0, 64, Some(1)).unwrap();
        let a = h.eval_line(0.25).unwrap();
        let b = h.eval_line(3.25).unwrap();
        assert!((b - a - 3.0).abs() < 1e-12);
        assert!((a - 0.35).abs() < 1e-12);
        assert!(h.eval_line(-1.75).is_ok());
    }

    #[test]
    fn circle_lift_is_periodic() {
        let rot = Complex64::from_polar(1.0, 0.3);
        let h = BoundaryHomeo::circle_from_fn(|t| rot * Complex64::from_polar(1.0, TAU * t), Complex64::new(0.0, 0.0), 1.0, 32)
            .unwrap();
        let l0 = h.lift(0.1);
        assert!((h.lift(1.1) - l0 - 1.0).abs() < 1e-12);
        assert!((l0 - (0.1 + 0.3 / TAU)).abs() < 1e-12);
        let back = BoundaryHomeo::circle_from_fn(|t| Complex64::from_polar(1.0, -TAU * t), Complex64::new(0.0, 0.0), 1.0, 32);
        assert_eq!(back.unwrap_err(), ExtensionError::NotOrientationPreserving);
    }

    #[test]
    fn decreasing_line_rejected() {
        let r = BoundaryHomeo::line_from_fn(|x| -x, 0.0, 0.0, 1.0, 4, None);
        assert!(matches!(r, Err(ExtensionError::NotIncreasing { .. })));
    }
}
