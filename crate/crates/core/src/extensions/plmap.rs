use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::geom::serde_complex;

use super::ExtensionError;

/// Piecewise-linear map: each source triangle is mapped affinely onto the
/// triangle spanned by the image vertices with the same indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLMap {
    #[serde(with = "serde_complex::vec")]
    pub vertices: Vec<Complex64>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(with = "serde_complex::vec")]
    pub image_vertices: Vec<Complex64>,
    pub depth: u32,
    pub period: Option<u32>,
}

/// Twice the signed area of `(a, b, c)`.
#[inline]
pub fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let (u, v) = (b - a, c - a);
    u.re * v.im - u.im * v.re
}

fn tri_scale(p: [Complex64; 3]) -> f64 {
    (p[1] - p[0]).norm().max((p[2] - p[1]).norm()).max((p[0] - p[2]).norm())
}

/// Interiors of the two (positively oriented) triangles intersect.
///
/// Separating-axis test over the six edge normals; a gap or a contact below
/// `eps` counts as separated.
pub fn triangles_overlap(p: [Complex64; 3], q: [Complex64; 3], eps: f64) -> bool {
    for tri in [p, q] {
        for k in 0..3 {
            let e = tri[(k + 1) % 3] - tri[k];
            let n = Complex64::new(-e.im, e.re);
            let proj = |z: Complex64| n.re * z.re + n.im * z.im;
            let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
            for z in p {
                let s = proj(z);
                lo1 = lo1.min(s);
                hi1 = hi1.max(s);
            }
            let (mut lo2, mut hi2) = (f64::INFINITY, f64::NEG_INFINITY);
            for z in q {
                let s = proj(z);
                lo2 = lo2.min(s);
                hi2 = hi2.max(s);
            }
            let tol = eps * n.norm();
            if hi1 <= lo2 + tol || hi2 <= lo1 + tol {
                return false;
            }
        }
    }
    true
}

fn interior_angles(p: [Complex64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3] - p[k];
        let b = p[(k + 2) % 3] - p[k];
        out[k] = (a.conj() * b).arg().abs();
    }
    out
}

impl PLMap {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn source_triangle(&self, t: usize) -> [Complex64; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    pub fn image_triangle(&self, t: usize) -> [Complex64; 3] {
        let [i, j, k] = self.triangles[t];
        [self.image_vertices[i], self.image_vertices[j], self.image_vertices[k]]
    }

    /// Checks indexing and that every source triangle is positively oriented.
    pub fn validate(&self) -> Result<(), ExtensionError> {
        if self.vertices.len() != self.image_vertices.len() {
            return Err(ExtensionError::InvalidInput("vertex and image counts differ".into()));
        }
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(ExtensionError::InvalidInput(format!("triangle {t} has an out-of-range index")));
            }
            let p = self.source_triangle(t);
            if !(orient(p[0], p[1], p[2]) > 0.0) {
                return Err(ExtensionError::DegenerateTriangle { triangle: t });
            }
        }
        Ok(())
    }

    /// Triangles whose image is degenerate or negatively oriented.
    pub fn orientation_failures(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .into_par_iter()
            .filter(|&t| {
                let p = self.image_triangle(t);
                let s = tri_scale(p);
                !(orient(p[0], p[1], p[2]) > 1e-14 * s * s)
            })
            .collect()
    }

    /// First pair of image triangles whose interiors intersect, if any.
    pub fn find_image_overlap(&self) -> Option<(usize, usize)> {
        let tris: Vec<[Complex64; 3]> = (0..self.len()).map(|t| self.image_triangle(t)).collect();
        find_overlap(&tris)
    }

    /// Minimum interior angle in degrees over source and image triangles.
    pub fn min_angles(&self) -> (f64, f64) {
        let fold = |get: &dyn Fn(usize) -> [Complex64; 3]| {
            (0..self.len())
                .map(|t| interior_angles(get(t)).into_iter().fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min)
                .to_degrees()
        };
        (fold(&|t| self.source_triangle(t)), fold(&|t| self.image_triangle(t)))
    }

    /// Image of `z` if it lies in some source triangle. Linear scan.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        for t in 0..self.len() {
            let p = self.source_triangle(t);
            let area = orient(p[0], p[1], p[2]);
            let tol = -1e-12 * area.abs();
            let l0 = orient(z, p[1], p[2]);
            let l1 = orient(p[0], z, p[2]);
            let l2 = orient(p[0], p[1], z);
            if l0 >= tol && l1 >= tol && l2 >= tol {
                let q = self.image_triangle(t);
                return Some((q[0] * l0 + q[1] * l1 + q[2] * l2) / area);
            }
        }
        None
    }

    /// Applies `f` to every source vertex and `g` to every image vertex.
    pub fn map_vertices(&self, f: impl Fn(Complex64) -> Complex64, g: impl Fn(Complex64) -> Complex64) -> PLMap {
        PLMap {
            vertices: self.vertices.iter().map(|&z| f(z)).collect(),
            triangles: self.triangles.clone(),
            image_vertices: self.image_vertices.iter().map(|&z| g(z)).collect(),
            depth: self.depth,
            period: self.period,
        }
    }

    /// Same map with every triangle listed in reverse order; used after a
    /// reflection of both source and image.
    pub fn reversed(mut self) -> PLMap {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
        self
    }

    /// Disjoint union of two meshes, identifying vertices that coincide in
    /// both source and image up to `tol`.
    pub fn glue(&self, other: &PLMap, tol: f64) -> PLMap {
        let key = |z: Complex64| ((z.re / tol).round() as i64, (z.im / tol).round() as i64);
        let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &z) in self.vertices.iter().enumerate() {
            index.entry(key(z)).or_default().push(i);
        }
        let mut vertices = self.vertices.clone();
        let mut images = self.image_vertices.clone();
        let mut remap = Vec::with_capacity(other.vertices.len());
        for (z, w) in other.vertices.iter().zip(&other.image_vertices) {
            let hit = index
                .get(&key(*z))
                .and_then(|c| c.iter().copied().find(|&i| (vertices[i] - z).norm() <= tol && (images[i] - w).norm() <= tol));
            match hit {
                Some(i) => remap.push(i),
                None => {
                    remap.push(vertices.len());
                    vertices.push(*z);
                    images.push(*w);
                }
            }
        }
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]]));
        PLMap {
            vertices,
            triangles,
            image_vertices: images,
            depth: self.depth.max(other.depth),
            period: if self.period == other.period { self.period } else { None },
        }
    }

    /// Splits every triangle whose image crosses the zero set of `side`.
    ///
    /// `side(image_triangle, w)` must be affine in `w` for a fixed triangle and
    /// agree on shared edges. New vertices are shared between neighbours.
    pub fn cut_images(&self, side: impl Fn(&[Complex64; 3], Complex64) -> f64) -> PLMap {
        const EPS: f64 = 1e-12;
        let mut vertices = self.vertices.clone();
        let mut images = self.image_vertices.clone();
        let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for (t, &tri) in self.triangles.iter().enumerate() {
            let w = self.image_triangle(t);
            let s: Vec<f64> = w.iter().map(|&p| side(&w, p)).collect();
            let sg: Vec<i32> = s.iter().map(|&x| if x > EPS { 1 } else if x < -EPS { -1 } else { 0 }).collect();
            let pos = sg.iter().filter(|&&x| x > 0).count();
            let neg = sg.iter().filter(|&&x| x < 0).count();
            if pos == 0 || neg == 0 {
                triangles.push(tri);
                continue;
            }
            let mut cut = |a: usize, b: usize| -> usize {
                let (i, j) = (tri[a].min(tri[b]), tri[a].max(tri[b]));
                *cuts.entry((i, j)).or_insert_with(|| {
                    let (si, sj) = if tri[a] == i { (s[a], s[b]) } else { (s[b], s[a]) };
                    let lam = si / (si - sj);
                    vertices.push(vertices[i] + (vertices[j] - vertices[i]) * lam);
                    images.push(images[i] + (images[j] - images[i]) * lam);
                    vertices.len() - 1
                })
            };
            if let Some(a) = (0..3).find(|&k| sg[k] == 0) {
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let p = cut(b, c);
                triangles.push([tri[a], tri[b], p]);
                triangles.push([tri[a], p, tri[c]]);
            } else {
                // the vertex alone on its side
                let a = (0..3).find(|&k| sg.iter().filter(|&&x| x == sg[k]).count() == 1).expect("one lone vertex");
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let p = cut(a, b);
                let q = cut(a, c);
                triangles.push([tri[a], p, q]);
                triangles.push([p, tri[b], tri[c]]);
                triangles.push([p, tri[c], q]);
            }
        }
        PLMap { vertices, triangles, image_vertices: images, depth: self.depth, period: self.period }
    }

    /// Bisects edges flagged by `too_long` (given source and image endpoints)
    /// until none remain, keeping the mesh conforming.
    pub fn refine_edges(&self, too_long: impl Fn(Complex64, Complex64, Complex64, Complex64) -> bool) -> PLMap {
        let mut m = self.clone();
        loop {
            let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
            let mut vertices = m.vertices.clone();
            let mut images = m.image_vertices.clone();
            for tri in &m.triangles {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    if mids.contains_key(&key) {
                        continue;
                    }
                    if too_long(m.vertices[a], m.vertices[b], m.image_vertices[a], m.image_vertices[b]) {
                        let (i, j) = key;
                        vertices.push((m.vertices[i] + m.vertices[j]) * 0.5);
                        images.push((m.image_vertices[i] + m.image_vertices[j]) * 0.5);
                        mids.insert(key, vertices.len() - 1);
                    }
                }
            }
            if mids.is_empty() {
                return m;
            }
            let mut triangles = Vec::with_capacity(m.triangles.len() * 2);
            for &tri in &m.triangles {
                let mid = |k: usize| {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    mids.get(&(a.min(b), a.max(b))).copied()
                };
                let ms = [mid(0), mid(1), mid(2)];
                match ms.iter().filter(|x| x.is_some()).count() {
                    0 => triangles.push(tri),
                    3 => {
                        let (m0, m1, m2) = (ms[0].unwrap(), ms[1].unwrap(), ms[2].unwrap());
                        triangles.push([tri[0], m0, m2]);
                        triangles.push([m0, tri[1], m1]);
                        triangles.push([m2, m1, tri[2]]);
                        triangles.push([m0, m1, m2]);
                    }
                    1 => {
                        let k = (0..3).find(|&k| ms[k].is_some()).unwrap();
                        let (v0, v1, v2) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let m0 = ms[k].unwrap();
                        triangles.push([v0, m0, v2]);
                        triangles.push([m0, v1, v2]);
                    }
                    _ => {
                        // edges k and k+1 split, edge k+2 intact
                        let k = (0..3).find(|&k| ms[(k + 2) % 3].is_none()).unwrap();
                        let (v0, v1, v2) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let (m0, m1) = (ms[k].unwrap(), ms[(k + 1) % 3].unwrap());
                        triangles.push([m0, v1, m1]);
                        triangles.push([v0, m0, m1]);
                        triangles.push([v0, m1, v2]);
                    }
                }
            }
            m = PLMap { vertices, triangles, image_vertices: images, depth: m.depth, period: m.period };
        }
    }
}

/// Sweep over bounding boxes sorted by their left edge.
pub fn find_overlap(tris: &[[Complex64; 3]]) -> Option<(usize, usize)> {
    struct Boxed {
        lo: Complex64,
        hi: Complex64,
        idx: usize,
    }
    let mut boxes: Vec<Boxed> = tris
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let lo = Complex64::new(p.iter().map(|z| z.re).fold(f64::INFINITY, f64::min), p.iter().map(|z| z.im).fold(f64::INFINITY, f64::min));
            let hi = Complex64::new(
                p.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
                p.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max),
            );
            Boxed { lo, hi, idx }
        })
        .collect();
    boxes.sort_by(|a, b| a.lo.re.total_cmp(&b.lo.re).then(a.idx.cmp(&b.idx)));
    let hits: Vec<(usize, usize)> = (0..boxes.len())
        .into_par_iter()
        .filter_map(|i| {
            let a = &boxes[i];
            let sa = tri_scale(tris[a.idx]);
            for b in &boxes[i + 1..] {
                if b.lo.re >= a.hi.re {
                    break;
                }
                if b.lo.im >= a.hi.im || a.lo.im >= b.hi.im {
                    continue;
                }
                let eps = 1e-9 * sa.min(tri_scale(tris[b.idx]));
                if triangles_overlap(tris[a.idx], tris[b.idx], eps) {
                    return Some((a.idx.min(b.idx), a.idx.max(b.idx)));
                }
            }
            None
        })
        .collect();
    hits.into_iter().min()
}
