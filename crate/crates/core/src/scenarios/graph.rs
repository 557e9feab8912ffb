use serde::{Deserialize, Serialize};

/// Positive Lipschitz height functions for graph pairs, together with an
/// antiderivative of their reciprocal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphProfile {
    /// `f ≡ c`.
    Constant { c: f64 },
    /// `f(x) = (|x| + 1)^{−p}`.
    Power { p: f64 },
    /// `f(x) = e^{−|x|}`.
    Exp,
}

impl GraphProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            GraphProfile::Constant { c } => c,
            GraphProfile::Power { p } => (x.abs() + 1.0).powf(-p),
            GraphProfile::Exp => (-x.abs()).exp(),
        }
    }

    /// `F(x) = ∫₀ˣ dt / f(t)`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match *self {
            GraphProfile::Constant { c } => x / c,
            GraphProfile::Power { p } => ((x.abs() + 1.0).powf(p + 1.0) - 1.0).copysign(x) / (p + 1.0),
            GraphProfile::Exp => x.abs().exp_m1().copysign(x),
        }
    }

    /// Global Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            GraphProfile::Constant { .. } => 0.0,
            GraphProfile::Power { p } => p.abs(),
            GraphProfile::Exp => 1.0,
        }
    }

    /// Whether `f` is bounded below by a positive constant everywhere.
    pub(crate) fn positive(&self) -> bool {
        match *self {
            GraphProfile::Constant { c } => c > 0.0 && c.is_finite(),
            GraphProfile::Power { p } => p.is_finite() && p >= 0.0,
            GraphProfile::Exp => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::qs_ratio_at;

    #[test]
    fn antiderivatives() {
        let p = GraphProfile::Power { p: 1.0 };
        for x in [-3.0f64, -0.5, 0.0, 0.25, 4.0] {
            let expect = ((x.abs() + 1.0) * (x.abs() + 1.0) - 1.0) / 2.0 * f64::signum(x);
            assert!((p.antiderivative(x) - expect).abs() < 1e-12);
        }
        let e = GraphProfile::Exp;
        let r = qs_ratio_at(|x| e.antiderivative(x), 3.0, 3.0);
        assert!((r / 3f64.exp() - 1.0).abs() < 1e-12);
        assert_eq!(GraphProfile::Constant { c: 2.0 }.antiderivative(3.0), 1.5);
    }
}
