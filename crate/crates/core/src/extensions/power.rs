use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExtensionError;

/// Radial stretch `re^{iθ} ↦ r^β e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub beta: f64,
}

impl PowerMap {
    pub fn new(beta: f64) -> Result<Self, ExtensionError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ExtensionError::InvalidInput(format!("power exponent must be positive, got {beta}")));
        }
        Ok(PowerMap { beta })
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64, ExtensionError> {
        let r = z.norm();
        if r == 0.0 {
            return Err(ExtensionError::OriginExcluded);
        }
        Ok(z * r.powf(self.beta - 1.0))
    }

    pub fn inverse(&self) -> PowerMap {
        PowerMap { beta: 1.0 / self.beta }
    }

    /// Exact dilatation `max(β, 1/β)`.
    pub fn dilatation(&self) -> f64 {
        self.beta.max(1.0 / self.beta)
    }
}

pub fn power_map(beta: f64) -> Result<PowerMap, ExtensionError> {
    PowerMap::new(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn examples() {
        let p = power_map(2.0).unwrap();
        assert!((p.apply(c(2.0, 0.0)).unwrap() - c(4.0, 0.0)).norm() < 1e-14);
        assert!((p.apply(c(0.0, 2.0)).unwrap() - c(0.0, 4.0)).norm() < 1e-14);
        let z = c(0.6, 0.8);
        assert!((p.apply(z).unwrap() - z).norm() < 1e-15);
        assert_eq!(power_map(1.0).unwrap().apply(c(1.5, -0.2)).unwrap(), c(1.5, -0.2));
        assert_eq!(p.apply(c(0.0, 0.0)), Err(ExtensionError::OriginExcluded));
        assert!(power_map(0.0).is_err());
    }
}
