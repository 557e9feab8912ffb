//! Numerical tools for pairs of Jordan regions in the plane.
//!
//! The crate computes relative hyperbolic and quasihyperbolic distances on
//! masked grids, empirical quasisymmetric and quasi-Möbius distortion
//! profiles, ring moduli, and piecewise-linear quasiconformal extensions of
//! boundary homeomorphisms.

pub mod dilatation;
pub mod distortion;
pub mod extensions;
pub mod geom;
pub mod io;
pub mod metric;
pub mod scenarios;

pub use num_complex::Complex64;

/// Shorthand for building a complex number.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
