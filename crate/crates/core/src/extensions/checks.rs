use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distortion::qs_profile;
use crate::metric::DistanceMatrix;

use super::ExtensionError;

const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripBounds {
    /// Range of `Im f` over the samples of `ℝ × {1}`.
    pub min_im: f64,
    pub max_im: f64,
    /// Empirical `η(1)` of `f` on all samples.
    pub eta_one: Option<f64>,
    /// The range lies in `[1/η(1), η(1)]`.
    pub within_band: bool,
}

/// Height band of `f(ℝ × {1})` for an embedding `f` of `ℝ × {0,1}` that is
/// the identity on the real axis. Samples are `(z, f(z))` with `Im z ∈ {0, 1}`.
pub fn strip_bounds_check(samples: &[(Complex64, Complex64)], budget: usize, seed: u64) -> Result<StripBounds, ExtensionError> {
    let mut min_im = f64::INFINITY;
    let mut max_im = f64::NEG_INFINITY;
    for (i, &(z, w)) in samples.iter().enumerate() {
        if z.im == 0.0 {
            if (z - w).norm() > IDENTITY_TOL {
                return Err(ExtensionError::NotIdentityOnBase { index: i });
            }
        } else if z.im == 1.0 {
            if !(w.im > 0.0) {
                return Err(ExtensionError::WrongSideOfLine { index: i });
            }
            min_im = min_im.min(w.im);
            max_im = max_im.max(w.im);
        } else {
            return Err(ExtensionError::InvalidInput(format!("sample {i} is not on y = 0 or y = 1")));
        }
    }
    if !min_im.is_finite() {
        return Err(ExtensionError::InvalidInput("no samples on y = 1".into()));
    }
    let eta_one = if samples.len() >= 3 {
        let src = DistanceMatrix::from_complex(&samples.iter().map(|p| p.0).collect::<Vec<_>>());
        let tgt = DistanceMatrix::from_complex(&samples.iter().map(|p| p.1).collect::<Vec<_>>());
        qs_profile(&src, &tgt, budget, seed).ok().and_then(|p| p.eta_one())
    } else {
        None
    };
    let within_band = eta_one.map_or(false, |e| min_im >= 1.0 / e - 1e-12 && max_im <= e + 1e-12);
    Ok(StripBounds { min_im, max_im, eta_one, within_band })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnuliBounds {
    /// `min |f|` on the outer circle.
    pub l_prime: f64,
    pub max_abs: f64,
    /// `(max |f| - L') / (L' - 1)`.
    pub k_gap: f64,
}

/// Radial spread of `f(S(0,L))` for an embedding of `S(0,1) ∪ S(0,L)` that is
/// the identity on the unit circle. Samples are `(z, f(z))`.
pub fn annuli_identity_check(samples: &[(Complex64, Complex64)], l: f64) -> Result<AnnuliBounds, ExtensionError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &(z, w)) in samples.iter().enumerate() {
        let r = z.norm();
        if (r - 1.0).abs() < IDENTITY_TOL {
            if (z - w).norm() > IDENTITY_TOL {
                return Err(ExtensionError::NotIdentityOnBase { index: i });
            }
        } else if (r - l).abs() < IDENTITY_TOL * l {
            let a = w.norm();
            if !(a > 1.0) {
                return Err(ExtensionError::ImageInsideDisk { index: i });
            }
            lo = lo.min(a);
            hi = hi.max(a);
        } else {
            return Err(ExtensionError::InvalidInput(format!("sample {i} is on neither circle")));
        }
    }
    if !lo.is_finite() {
        return Err(ExtensionError::InvalidInput("no samples on the outer circle".into()));
    }
    Ok(AnnuliBounds { l_prime: lo, max_abs: hi, k_gap: (hi - lo) / (lo - 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use std::f64::consts::TAU;

    fn strip_samples(top: impl Fn(f64) -> Complex64) -> Vec<(Complex64, Complex64)> {
        let mut v = Vec::new();
        for k in 0..40 {
            let x = -5.0 + 0.25 * k as f64;
            v.push((c(x, 0.0), c(x, 0.0)));
            v.push((c(x, 1.0), top(x)));
        }
        v
    }

    #[test]
    fn strip_examples() {
        let id = strip_bounds_check(&strip_samples(|x| c(x, 1.0)), 1_000_000, 0).unwrap();
        assert_eq!((id.min_im, id.max_im), (1.0, 1.0));
        let up = strip_bounds_check(&strip_samples(|x| c(x, 2.0)), 1_000_000, 0).unwrap();
        assert_eq!((up.min_im, up.max_im), (2.0, 2.0));
        assert!(up.eta_one.unwrap() >= 2.0 - 1e-12);
        assert!(up.within_band);
        let wavy = strip_bounds_check(&strip_samples(|x| c(x, 1.0 + 0.2 * x.sin())), 1_000_000, 0).unwrap();
        assert!(wavy.min_im >= 0.8 && wavy.max_im <= 1.2);
        assert!(matches!(
            strip_bounds_check(&strip_samples(|x| c(x, -1.0)), 1000, 0),
            Err(ExtensionError::WrongSideOfLine { .. })
        ));
    }

    fn annuli_samples(outer: impl Fn(Complex64) -> Complex64) -> Vec<(Complex64, Complex64)> {
        let mut v = Vec::new();
        for k in 0..360 {
            let u = Complex64::from_polar(1.0, TAU * k as f64 / 360.0);
            v.push((u, u));
            v.push((u * 2.0, outer(u * 2.0)));
        }
        v
    }

    #[test]
    fn annuli_examples() {
        let id = annuli_identity_check(&annuli_samples(|z| z), 2.0).unwrap();
        assert!((id.l_prime - 2.0).abs() < 1e-12 && id.k_gap.abs() < 1e-12);
        let s = annuli_identity_check(&annuli_samples(|z| z * 1.5), 2.0).unwrap();
        assert!((s.l_prime - 3.0).abs() < 1e-12 && s.k_gap.abs() < 1e-12);
        let w = annuli_identity_check(&annuli_samples(|z| z * (2.0 + 0.1 * z.arg().cos()) / 2.0), 2.0).unwrap();
        assert!((w.l_prime - 1.9).abs() < 1e-12);
        assert!((w.k_gap - 0.2 / 0.9).abs() < 1e-12);
        assert!(matches!(annuli_identity_check(&annuli_samples(|z| z * 0.3), 2.0), Err(ExtensionError::ImageInsideDisk { .. })));
    }
}
