use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Rect;

use super::MetricError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Connectivity {
    #[serde(rename = "8")]
    Eight,
    #[default]
    #[serde(rename = "16")]
    Sixteen,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            8 => Some(Connectivity::Eight),
            16 => Some(Connectivity::Sixteen),
            _ => None,
        }
    }

    fn offsets(self) -> &'static [(i64, i64)] {
        const EIGHT: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        const SIXTEEN: [(i64, i64); 16] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
            (1, 2),
            (2, 1),
            (-1, 2),
            (-2, 1),
            (1, -2),
            (2, -1),
            (-1, -2),
            (-2, -1),
        ];
        match self {
            Connectivity::Eight => &EIGHT,
            Connectivity::Sixteen => &SIXTEEN,
        }
    }
}

/// Resolution and extent of a metric grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    pub connectivity: Connectivity,
    /// Window to discretize; `None` picks the domain's bounding box or the
    /// default `[-8, 8]²` for unbounded domains.
    pub window: Option<Rect>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { h: 0.01, connectivity: Connectivity::Sixteen, window: None }
    }
}

impl GridSpec {
    pub fn with_h(h: f64) -> Self {
        GridSpec { h, ..Default::default() }
    }

    pub fn window(mut self, w: Rect) -> Self {
        self.window = Some(w);
        self
    }
}

/// Default window for unbounded domains.
pub const DEFAULT_WINDOW: f64 = 8.0;

const MAX_NODES: usize = 60_000_000;

/// Masked lattice with density values at nodes and edge midpoints.
#[derive(Clone, Debug)]
pub struct MetricGrid {
    pub bbox: Rect,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
    pub density: Vec<f64>,
    pub connectivity: Connectivity,
    // densities on the half-step lattice, infinite where not admissible
    half: Vec<f64>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: u32,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree.
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<u32>,
}

impl ShortestPaths {
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        if !self.dist[target].is_finite() {
            return Vec::new();
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.pred[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        path
    }
}

impl MetricGrid {
    /// Builds the lattice over `bbox`.
    ///
    /// `admissible` decides membership for nodes and edge midpoints, and
    /// `density` is only called on admissible points.
    pub fn build(
        bbox: Rect,
        h: f64,
        connectivity: Connectivity,
        admissible: impl Fn(Complex64) -> bool,
        density: impl Fn(Complex64) -> f64,
    ) -> Result<Self, MetricError> {
        if !(h > 0.0) || !h.is_finite() || !bbox.is_valid() {
            return Err(MetricError::InvalidGrid(format!("h = {h}, window = {bbox:?}")));
        }
        let nx = (bbox.width() / h + 1e-9).floor() as usize + 1;
        let ny = (bbox.height() / h + 1e-9).floor() as usize + 1;
        if nx < 2 || ny < 2 || nx.saturating_mul(ny) > MAX_NODES {
            return Err(MetricError::InvalidGrid(format!("{nx} x {ny} nodes")));
        }
        let (hx, hy) = (2 * nx - 1, 2 * ny - 1);
        let mut half = vec![f64::INFINITY; hx * hy];
        for j in 0..hy {
            for i in 0..hx {
                let z = Complex64::new(bbox.xmin + 0.5 * h * i as f64, bbox.ymin + 0.5 * h * j as f64);
                if admissible(z) {
                    let d = density(z);
                    if d.is_finite() && d > 0.0 {
                        half[j * hx + i] = d;
                    }
                }
            }
        }
        let mut mask = vec![false; nx * ny];
        let mut dens = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let d = half[(2 * j) * hx + 2 * i];
                if d.is_finite() {
                    mask[j * nx + i] = true;
                    dens[j * nx + i] = d;
                }
            }
        }
        Ok(MetricGrid { bbox, h, nx, ny, mask, density: dens, connectivity, half })
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn admissible_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn position(&self, node: usize) -> Complex64 {
        let (i, j) = (node % self.nx, node / self.nx);
        Complex64::new(self.bbox.xmin + self.h * i as f64, self.bbox.ymin + self.h * j as f64)
    }

    /// Weight of the edge from `node` along `(di, dj)`, if it exists.
    pub fn edge_weight(&self, node: usize, di: i64, dj: i64) -> Option<(usize, f64)> {
        let (i, j) = ((node % self.nx) as i64, (node / self.nx) as i64);
        let (ti, tj) = (i + di, j + dj);
        if ti < 0 || tj < 0 || ti >= self.nx as i64 || tj >= self.ny as i64 {
            return None;
        }
        let target = tj as usize * self.nx + ti as usize;
        if !self.mask[target] {
            return None;
        }
        let hx = 2 * self.nx - 1;
        let mid = (2 * j + dj) as usize * hx + (2 * i + di) as usize;
        let rho = self.half[mid];
        if !rho.is_finite() {
            return None;
        }
        let len = self.h * ((di * di + dj * dj) as f64).sqrt();
        Some((target, rho * len))
    }

    /// Nearest admissible node within `2h` of `z`.
    pub fn snap(&self, z: Complex64) -> Result<usize, MetricError> {
        let fi = (z.re - self.bbox.xmin) / self.h;
        let fj = (z.im - self.bbox.ymin) / self.h;
        let (ci, cj) = (fi.round() as i64, fj.round() as i64);
        let mut best: Option<(f64, usize)> = None;
        for dj in -3..=3 {
            for di in -3..=3 {
                let (i, j) = (ci + di, cj + dj);
                if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                    continue;
                }
                let node = j as usize * self.nx + i as usize;
                if !self.mask[node] {
                    continue;
                }
                let d = (self.position(node) - z).norm();
                if d < 2.0 * self.h && best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, node));
                }
            }
        }
        best.map(|(_, n)| n).ok_or(MetricError::SnapFailed { re: z.re, im: z.im })
    }

    /// Dijkstra from `source`; stops early once `target` is settled.
    pub fn shortest_paths(&self, source: usize, target: Option<usize>) -> ShortestPaths {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(State { cost: 0.0, node: source as u32 });
        let offsets = self.connectivity.offsets();
        while let Some(State { cost, node }) = heap.pop() {
            let node = node as usize;
            if Some(node) == target {
                break;
            }
            if cost > dist[node] {
                continue;
            }
            for &(di, dj) in offsets {
                if let Some((next, w)) = self.edge_weight(node, di, dj) {
                    let nc = cost + w;
                    if nc < dist[next] {
                        dist[next] = nc;
                        pred[next] = node as u32;
                        heap.push(State { cost: nc, node: next as u32 });
                    }
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }

    /// Sum of edge weights along a node path.
    pub fn path_length(&self, path: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let di = (b % self.nx) as i64 - (a % self.nx) as i64;
            let dj = (b / self.nx) as i64 - (a / self.nx) as i64;
            let (_, wt) = self.edge_weight(a, di, dj)?;
            total += wt;
        }
        Some(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_gives_grid_norm() {
        let g = MetricGrid::build(Rect::new(0.0, 1.0, 0.0, 1.0), 0.1, Connectivity::Sixteen, |_| true, |_| 1.0).unwrap();
        assert_eq!((g.nx, g.ny), (11, 11));
        let s = g.snap(Complex64::new(0.0, 0.0)).unwrap();
        let t = g.snap(Complex64::new(0.6, 0.3)).unwrap();
        let sp = g.shortest_paths(s, None);
        // direction (2,1) is a lattice direction, so the path is straight
        assert!((sp.dist[t] - 0.6f64.hypot(0.3)).abs() < 1e-12);
        let path = sp.path_to(t);
        assert!((g.path_length(&path).unwrap() - sp.dist[t]).abs() < 1e-12);
    }

    #[test]
    fn snap_fails_far_from_mask() {
        let g = MetricGrid::build(Rect::new(0.0, 1.0, 0.0, 1.0), 0.1, Connectivity::Eight, |z| z.re < 0.5, |_| 1.0).unwrap();
        assert!(g.snap(Complex64::new(0.9, 0.5)).is_err());
        assert!(g.snap(Complex64::new(0.55, 0.5)).is_ok());
    }
}
