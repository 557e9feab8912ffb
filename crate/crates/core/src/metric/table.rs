use serde::{Deserialize, Serialize};

use crate::geom::{ExtPoint, Metric};

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix { n, data: vec![0.0; n * n] }
    }

    /// Builds the matrix from a distance function evaluated on `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_points(points: &[ExtPoint], metric: Metric) -> Self {
        Self::from_fn(points.len(), |i, j| metric.distance(points[i], points[j]))
    }

    pub fn from_complex(points: &[num_complex::Complex64]) -> Self {
        Self::from_fn(points.len(), |i, j| (points[i] - points[j]).norm())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Restriction to a subset of indices.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }
}
