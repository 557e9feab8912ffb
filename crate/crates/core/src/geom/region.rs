use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::mobius::MobiusMap;
use super::point::{serde_complex, ExtPoint};
use super::GeomError;

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Rect { xmin, xmax, ymin, ymax }
    }

    pub fn square(half: f64) -> Self {
        Rect::new(-half, half, -half, half)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn is_valid(&self) -> bool {
        self.width() > 0.0 && self.height() > 0.0 && self.width().is_finite() && self.height().is_finite()
    }

    pub fn expand(&self, m: f64) -> Self {
        Rect::new(self.xmin - m, self.xmax + m, self.ymin - m, self.ymax + m)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.xmin && z.re <= self.xmax && z.im >= self.ymin && z.im <= self.ymax
    }

    pub fn bounding(points: &[Complex64]) -> Option<Self> {
        let first = points.first()?;
        let mut r = Rect::new(first.re, first.re, first.im, first.im);
        for z in points {
            r.xmin = r.xmin.min(z.re);
            r.xmax = r.xmax.max(z.re);
            r.ymin = r.ymin.min(z.im);
            r.ymax = r.ymax.max(z.im);
        }
        Some(r)
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(self.xmin.min(o.xmin), self.xmax.max(o.xmax), self.ymin.min(o.ymin), self.ymax.max(o.ymax))
    }
}

/// Shape of a region before the complement flag is applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RegionKind {
    /// `{ z : <normal, z> > offset }` with a unit normal.
    HalfPlane {
        #[serde(with = "serde_complex")]
        normal: Complex64,
        offset: f64,
    },
    Disk {
        #[serde(with = "serde_complex")]
        center: Complex64,
        radius: f64,
    },
    /// Interior of a simple closed polygon; the first vertex is not repeated.
    PolyJordan {
        #[serde(with = "serde_complex::vec")]
        vertices: Vec<Complex64>,
        positive: bool,
    },
}

/// A Jordan region, or the exterior of one when `complemented` is set.
///
/// The complement is the complement of the closure, so a region and its
/// complement share the same boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(flatten)]
    pub kind: RegionKind,
    pub complemented: bool,
}

fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn signed_area(v: &[Complex64]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Complex64, b: Complex64, p: Complex64, d: f64| {
        d == 0.0
            && p.re >= a.re.min(b.re)
            && p.re <= a.re.max(b.re)
            && p.im >= a.im.min(b.im)
            && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Checks that a closed polygon has no self-intersections.
pub fn is_simple_polygon(v: &[Complex64]) -> bool {
    let n = v.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if v[i] == v[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex and are allowed to touch there
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(a, b, v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Winding number of a closed polygon around `p`.
fn winding_number(v: &[Complex64], p: Complex64) -> i32 {
    let n = v.len();
    let mut wn = 0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if a.im <= p.im {
            if b.im > p.im && cross(b - a, p - a) > 0.0 {
                wn += 1;
            }
        } else if b.im <= p.im && cross(b - a, p - a) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Circle through three points, or `None` when they are collinear.
fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> Option<(Complex64, f64)> {
    let d = 2.0 * cross(b - a, c - a);
    let scale = (b - a).norm().max((c - a).norm());
    if d.abs() <= 1e-12 * scale * scale {
        return None;
    }
    let ba = b - a;
    let ca = c - a;
    let ux = (ca.im * ba.norm_sqr() - ba.im * ca.norm_sqr()) / d;
    let uy = (ba.re * ca.norm_sqr() - ca.re * ba.norm_sqr()) / d;
    let center = a + Complex64::new(ux, uy);
    Some((center, (a - center).norm()))
}

impl Region {
    pub fn half_plane(normal: Complex64, offset: f64) -> Result<Self, GeomError> {
        let n = normal.norm();
        if !(n > 0.0) || !offset.is_finite() {
            return Err(GeomError::InvalidRegion("half-plane normal must be nonzero".into()));
        }
        Ok(Region { kind: RegionKind::HalfPlane { normal: normal / n, offset: offset / n }, complemented: false })
    }

    /// `{ Im z > y }`.
    pub fn upper(y: f64) -> Self {
        Region { kind: RegionKind::HalfPlane { normal: Complex64::new(0.0, 1.0), offset: y }, complemented: false }
    }

    /// `{ Im z < y }`.
    pub fn lower(y: f64) -> Self {
        Region { kind: RegionKind::HalfPlane { normal: Complex64::new(0.0, -1.0), offset: -y }, complemented: false }
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeomError::InvalidRegion(format!("disk radius {radius} must be positive")));
        }
        Ok(Region { kind: RegionKind::Disk { center, radius }, complemented: false })
    }

    /// Polygonal Jordan region; orientation is detected from the vertex order.
    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self, GeomError> {
        if vertices.len() < 3 {
            return Err(GeomError::InvalidRegion("polygon needs at least 3 vertices".into()));
        }
        if !is_simple_polygon(&vertices) {
            return Err(GeomError::InvalidRegion("polygon is not simple".into()));
        }
        let positive = signed_area(&vertices) > 0.0;
        Ok(Region { kind: RegionKind::PolyJordan { vertices, positive }, complemented: false })
    }

    /// Complement of the closure.
    pub fn complement(&self) -> Self {
        Region { kind: self.kind.clone(), complemented: !self.complemented }
    }

    /// Checks the invariants of a deserialized region.
    pub fn validate(&self) -> Result<(), GeomError> {
        match &self.kind {
            RegionKind::HalfPlane { normal, offset } => {
                if (normal.norm() - 1.0).abs() > 1e-9 || !offset.is_finite() {
                    return Err(GeomError::InvalidRegion("half-plane normal must be a unit vector".into()));
                }
            }
            RegionKind::Disk { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
                    return Err(GeomError::InvalidRegion(format!("disk radius {radius} must be positive")));
                }
            }
            RegionKind::PolyJordan { vertices, positive } => {
                if vertices.len() < 3 {
                    return Err(GeomError::InvalidRegion("polygon needs at least 3 vertices".into()));
                }
                if !is_simple_polygon(vertices) {
                    return Err(GeomError::InvalidRegion("polygon is not simple".into()));
                }
                if (signed_area(vertices) > 0.0) != *positive {
                    return Err(GeomError::InvalidRegion("orientation flag disagrees with vertex order".into()));
                }
            }
        }
        Ok(())
    }

    /// Signed distance: positive inside the region, negative outside, zero on the boundary.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        let s = match &self.kind {
            RegionKind::HalfPlane { normal, offset } => dot(*normal, z) - offset,
            RegionKind::Disk { center, radius } => radius - (z - center).norm(),
            RegionKind::PolyJordan { vertices, .. } => {
                let d = poly_boundary_distance(vertices, z);
                if winding_number(vertices, z) != 0 {
                    d
                } else {
                    -d
                }
            }
        };
        if self.complemented {
            -s
        } else {
            s
        }
    }

    /// Open-set membership.
    pub fn contains(&self, z: Complex64) -> bool {
        self.signed_distance(z) > 0.0
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, z: Complex64) -> bool {
        self.signed_distance(z) >= 0.0
    }

    /// Euclidean distance from `z` to the boundary.
    pub fn boundary_distance(&self, z: ExtPoint) -> Result<f64, GeomError> {
        Ok(self.boundary_distance_finite(z.try_finite()?))
    }

    pub fn boundary_distance_finite(&self, z: Complex64) -> f64 {
        match &self.kind {
            RegionKind::HalfPlane { normal, offset } => (dot(*normal, z) - offset).abs(),
            RegionKind::Disk { center, radius } => ((z - center).norm() - radius).abs(),
            RegionKind::PolyJordan { vertices, .. } => poly_boundary_distance(vertices, z),
        }
    }

    /// Whether the region is a bounded subset of the plane.
    pub fn is_bounded(&self) -> bool {
        !self.complemented && !matches!(self.kind, RegionKind::HalfPlane { .. })
    }

    /// Whether infinity is an interior point of the region (in the sphere).
    pub fn contains_infinity(&self) -> bool {
        self.complemented && !matches!(self.kind, RegionKind::HalfPlane { .. })
    }

    /// Bounding box of the boundary curve, `None` for half-planes.
    pub fn boundary_bbox(&self) -> Option<Rect> {
        match &self.kind {
            RegionKind::HalfPlane { .. } => None,
            RegionKind::Disk { center, radius } => Some(Rect::new(
                center.re - radius,
                center.re + radius,
                center.im - radius,
                center.im + radius,
            )),
            RegionKind::PolyJordan { vertices, .. } => Rect::bounding(vertices),
        }
    }

    /// A point well inside the region.
    pub fn interior_point(&self) -> Complex64 {
        match (&self.kind, self.complemented) {
            (RegionKind::HalfPlane { normal, offset }, false) => normal * (offset + 1.0),
            (RegionKind::HalfPlane { normal, offset }, true) => normal * (offset - 1.0),
            (RegionKind::Disk { center, .. }, false) => *center,
            (RegionKind::Disk { center, radius }, true) => center + Complex64::new(2.0 * radius, 0.0),
            (RegionKind::PolyJordan { vertices, .. }, true) => {
                let b = Rect::bounding(vertices).expect("polygon has vertices");
                Complex64::new(b.xmax + b.width().max(b.height()), 0.5 * (b.ymin + b.ymax))
            }
            (RegionKind::PolyJordan { vertices, .. }, false) => {
                let b = Rect::bounding(vertices).expect("polygon has vertices");
                let n = 64;
                let mut best = (f64::NEG_INFINITY, vertices[0]);
                for i in 0..=n {
                    for j in 0..=n {
                        let z = Complex64::new(
                            b.xmin + b.width() * i as f64 / n as f64,
                            b.ymin + b.height() * j as f64 / n as f64,
                        );
                        let s = self.signed_distance(z);
                        if s > best.0 {
                            best = (s, z);
                        }
                    }
                }
                best.1
            }
        }
    }

    /// `n` points on the boundary in the orientation order of the curve.
    ///
    /// Polygon samples are spread over the edges in proportion to their
    /// length and always include the vertices.
    pub fn boundary_samples(&self, n: usize) -> Result<Vec<Complex64>, GeomError> {
        match &self.kind {
            RegionKind::HalfPlane { .. } => Err(GeomError::InvalidRegion("half-plane boundary is unbounded".into())),
            RegionKind::Disk { center, radius } => Ok((0..n)
                .map(|k| center + Complex64::from_polar(*radius, TAU * k as f64 / n as f64))
                .collect()),
            RegionKind::PolyJordan { vertices, .. } => Ok(sample_polygon(vertices, n)),
        }
    }

    /// Image of the region under a Möbius or anti-Möbius map.
    ///
    /// Circles and lines map exactly; polygon edges are subdivided into
    /// `segments` pieces before mapping.
    pub fn mobius_image(&self, t: &MobiusMap, segments: usize) -> Result<Region, GeomError> {
        let probe = self.probe_point(t)?;
        let probe_img = t.apply_finite(probe).ok_or(GeomError::PoleOnBoundary)?;
        let boundary: Vec<ExtPoint> = match &self.kind {
            RegionKind::HalfPlane { normal, offset } => {
                let base = normal * *offset;
                let dir = Complex64::new(-normal.im, normal.re);
                vec![
                    ExtPoint::Finite(base - dir),
                    ExtPoint::Finite(base),
                    ExtPoint::Finite(base + dir * 2.0),
                ]
            }
            RegionKind::Disk { center, radius } => (0..3)
                .map(|k| ExtPoint::Finite(center + Complex64::from_polar(*radius, TAU * k as f64 / 3.0 + 0.1)))
                .collect(),
            RegionKind::PolyJordan { vertices, .. } => {
                let n = vertices.len();
                let mut img = Vec::with_capacity(n * segments);
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    for k in 0..segments {
                        let z = a + (b - a) * (k as f64 / segments as f64);
                        img.push(t.apply_finite(z).ok_or(GeomError::PoleOnBoundary)?);
                    }
                }
                let mut r = Region::polygon(img)?;
                r.complemented = !r.contains(probe_img);
                return Ok(r);
            }
        };
        let imgs: Vec<ExtPoint> = boundary.iter().map(|&z| t.apply(z)).collect();
        let finite: Vec<Complex64> = imgs.iter().filter_map(|p| p.finite()).collect();
        let circle = if finite.len() == 3 { circumcircle(finite[0], finite[1], finite[2]) } else { None };
        match circle {
            Some((center, radius)) => {
                let mut r = Region::disk(center, radius)?;
                r.complemented = !r.contains(probe_img);
                Ok(r)
            }
            None => {
                // the image boundary is a line through the finite images
                let (p, q) = match finite.len() {
                    3 => (finite[0], finite[2]),
                    2 => (finite[0], finite[1]),
                    _ => return Err(GeomError::PoleOnBoundary),
                };
                let dir = (q - p) / (q - p).norm();
                let mut normal = Complex64::new(-dir.im, dir.re);
                if dot(normal, probe_img - p) < 0.0 {
                    normal = -normal;
                }
                Region::half_plane(normal, dot(normal, p))
            }
        }
    }

    // Interior point whose image under `t` is finite.
    fn probe_point(&self, t: &MobiusMap) -> Result<Complex64, GeomError> {
        let base = self.interior_point();
        let scale = self.boundary_bbox().map(|b| b.width().max(b.height())).unwrap_or(1.0);
        for k in 0..16 {
            let z = base + Complex64::from_polar(scale * 0.01 * k as f64, 0.7 * k as f64);
            if self.contains(z) && t.apply_finite(z).is_some() {
                return Ok(z);
            }
        }
        Err(GeomError::PoleOnBoundary)
    }
}

fn poly_boundary_distance(v: &[Complex64], z: Complex64) -> f64 {
    let n = v.len();
    (0..n).map(|i| segment_distance(z, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

/// Samples a closed polygon, distributing `n` points over edges by length.
pub fn sample_polygon(v: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = v.len();
    let lens: Vec<f64> = (0..m).map(|i| (v[(i + 1) % m] - v[i]).norm()).collect();
    let total: f64 = lens.iter().sum();
    // every edge gets at least its start vertex; the remaining budget goes by length
    let extra = n.saturating_sub(m);
    let mut counts: Vec<usize> = lens.iter().map(|l| 1 + (extra as f64 * l / total).floor() as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut i = 0;
    while assigned < n {
        counts[i % m] += 1;
        assigned += 1;
        i += 1;
    }
    let mut out = Vec::with_capacity(assigned);
    for i in 0..m {
        let a = v[i];
        let b = v[(i + 1) % m];
        for k in 0..counts[i] {
            out.push(a + (b - a) * (k as f64 / counts[i] as f64));
        }
    }
    out
}

/// Free-function form of [`Region::boundary_distance`].
pub fn boundary_distance(r: &Region, z: ExtPoint) -> Result<f64, GeomError> {
    r.boundary_distance(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Region {
        Region::polygon(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn distance_examples() {
        let hp = Region::upper(1.0);
        assert_eq!(hp.boundary_distance(ExtPoint::new(0.0, 0.0)).unwrap(), 1.0);
        let d = Region::disk(Complex64::new(0.0, 0.0), 2.0).unwrap();
        assert_eq!(d.boundary_distance(ExtPoint::new(1.0, 0.0)).unwrap(), 1.0);
        let sq = unit_square();
        // brute force over the four edge distances
        let z = Complex64::new(0.5, 0.5);
        let v = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 1.0)];
        let brute = (0..4).map(|i| segment_distance(z, v[i], v[(i + 1) % 4])).fold(f64::INFINITY, f64::min);
        assert_eq!(brute, 0.5);
        assert_eq!(sq.boundary_distance(ExtPoint::Finite(z)).unwrap(), brute);
        assert!(matches!(sq.boundary_distance(ExtPoint::Infinity), Err(GeomError::InfinityNotSupported)));
    }

    #[test]
    fn membership_and_complement() {
        let sq = unit_square();
        assert!(sq.contains(Complex64::new(0.5, 0.5)));
        assert!(!sq.contains(Complex64::new(1.5, 0.5)));
        assert!(!sq.contains(Complex64::new(1.0, 0.5)));
        assert!(sq.closure_contains(Complex64::new(1.0, 0.5)));
        let ext = sq.complement();
        assert!(ext.contains(Complex64::new(1.5, 0.5)));
        assert!(!ext.contains(Complex64::new(1.0, 0.5)));
        assert!(ext.contains_infinity());
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let bow = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        assert!(Region::polygon(bow).is_err());
    }

    #[test]
    fn mobius_image_of_disk_and_halfplane() {
        let d = Region::disk(Complex64::new(0.0, 0.0), 1.0).unwrap();
        let t = MobiusMap::pole_at(Complex64::new(0.0, 0.0));
        let img = d.mobius_image(&t, 8).unwrap();
        // the unit disk about the pole goes to the exterior of the unit disk
        assert!(img.complemented);
        if let RegionKind::Disk { center, radius } = img.kind {
            assert!(center.norm() < 1e-12);
            assert!((radius - 1.0).abs() < 1e-12);
        } else {
            panic!("expected a disk");
        }
        let hp = Region::upper(1.0);
        let img = hp.mobius_image(&MobiusMap::similarity(Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)), 8).unwrap();
        // z -> 2iz + 1 rotates the upper half-plane {Im > 1} to {Re < -1}
        assert!(img.contains(Complex64::new(-2.0, 5.0)));
        assert!(!img.contains(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn mobius_image_of_square() {
        let sq = unit_square();
        let t = MobiusMap::pole_at(Complex64::new(0.5, 0.5));
        let img = sq.mobius_image(&t, 32).unwrap();
        assert!(img.contains_infinity());
        let outside = t.apply_finite(Complex64::new(3.0, 0.2)).unwrap();
        assert!(!img.contains(outside));
    }

    #[test]
    fn polygon_sampling_hits_vertices() {
        let s = unit_square().boundary_samples(256).unwrap();
        assert_eq!(s.len(), 256);
        assert_eq!(s[64], Complex64::new(1.0, 0.0));
        assert_eq!(s[128], Complex64::new(1.0, 1.0));
    }


    use proptest::prelude::*;

    proptest! {
        #[test]
        fn complement_shares_the_boundary(x in -4.0..4.0f64, y in -4.0..4.0f64, which in 0usize..4) {
            let r = match which {
                0 => Region::upper(0.5),
                1 => Region::disk(Complex64::new(0.5, -0.5), 1.5).unwrap(),
                2 => Region::half_plane(Complex64::new(1.0, 2.0), -0.3).unwrap(),
                _ => unit_square(),
            };
            let z = ExtPoint::new(x, y);
            prop_assert_eq!(r.boundary_distance(z).unwrap(), r.complement().boundary_distance(z).unwrap());
        }
    }
}
