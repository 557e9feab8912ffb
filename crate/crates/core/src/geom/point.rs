use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::GeomError;

/// A point of the extended plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtPoint {
    Finite(Complex64),
    Infinity,
}

impl ExtPoint {
    pub fn new(re: f64, im: f64) -> Self {
        ExtPoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtPoint::Finite(z) => Some(*z),
            ExtPoint::Infinity => None,
        }
    }

    /// Returns the finite value or `InfinityNotSupported`.
    pub fn try_finite(&self) -> Result<Complex64, GeomError> {
        self.finite().ok_or(GeomError::InfinityNotSupported)
    }

    /// Finite values must not carry NaN or infinite parts.
    pub fn is_valid(&self) -> bool {
        match self {
            ExtPoint::Finite(z) => z.re.is_finite() && z.im.is_finite(),
            ExtPoint::Infinity => true,
        }
    }
}

impl From<Complex64> for ExtPoint {
    fn from(z: Complex64) -> Self {
        ExtPoint::Finite(z)
    }
}

impl fmt::Display for ExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtPoint::Finite(z) => write!(f, "({}, {})", z.re, z.im),
            ExtPoint::Infinity => write!(f, "inf"),
        }
    }
}

// JSON form: `[x, y]` for finite points and the string "inf" for infinity.
impl Serialize for ExtPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtPoint::Finite(z) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
            ExtPoint::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = ExtPoint;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[x, y] or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtPoint, E> {
                if v == "inf" {
                    Ok(ExtPoint::Infinity)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ExtPoint, A::Error> {
                let x: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                let p = ExtPoint::new(x, y);
                if !p.is_valid() {
                    return Err(de::Error::custom("non-finite coordinate"));
                }
                Ok(p)
            }
        }
        d.deserialize_any(PointVisitor)
    }
}

/// Serde helpers for complex numbers written as `[x, y]`.
pub mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(x, y))
    }

    pub mod vec {
        use num_complex::Complex64;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
            pairs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            let pairs = Vec::<[f64; 2]>::deserialize(d)?;
            Ok(pairs.into_iter().map(|[x, y]| Complex64::new(x, y)).collect())
        }
    }
}

/// Which distance the planar computations use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Chordal,
}

impl Metric {
    /// Distance in this metric. Euclidean distance to infinity is `f64::INFINITY`.
    pub fn distance(self, z: ExtPoint, w: ExtPoint) -> f64 {
        match self {
            Metric::Chordal => chordal_distance(z, w),
            Metric::Euclidean => match (z, w) {
                (ExtPoint::Finite(a), ExtPoint::Finite(b)) => (a - b).norm(),
                (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
                _ => f64::INFINITY,
            },
        }
    }
}

/// The chordal metric of the Riemann sphere, normalized to have diameter 2.
pub fn chordal_distance(z: ExtPoint, w: ExtPoint) -> f64 {
    match (z, w) {
        (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
        (ExtPoint::Finite(a), ExtPoint::Infinity) | (ExtPoint::Infinity, ExtPoint::Finite(a)) => {
            2.0 / (1.0 + a.norm_sqr()).sqrt()
        }
        (ExtPoint::Finite(a), ExtPoint::Finite(b)) => {
            2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
        }
    }
}

/// Cross-ratio `d(a,c) d(b,d) / (d(a,d) d(b,c))`.
///
/// With the Euclidean metric, factors involving infinity are dropped.
pub fn cross_ratio(
    a: ExtPoint,
    b: ExtPoint,
    c: ExtPoint,
    d: ExtPoint,
    metric: Metric,
) -> Result<f64, GeomError> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if chordal_distance(pts[i], pts[j]) == 0.0 {
                return Err(GeomError::DegenerateQuadruple);
            }
        }
    }
    let f = |x: ExtPoint, y: ExtPoint| {
        let v = metric.distance(x, y);
        if v.is_infinite() {
            1.0
        } else {
            v
        }
    };
    Ok(f(a, c) * f(b, d) / (f(a, d) * f(b, c)))
}

/// Largest pairwise distance in a point cloud.
pub fn diameter(points: &[ExtPoint], metric: Metric) -> f64 {
    let mut best = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            best = best.max(metric.distance(p, q));
        }
    }
    best
}

/// `dist(E, F) / min(diam E, diam F)`.
pub fn relative_distance(e: &[ExtPoint], f: &[ExtPoint], metric: Metric) -> Result<f64, GeomError> {
    let de = diameter(e, metric);
    let df = diameter(f, metric);
    if de == 0.0 || df == 0.0 {
        return Err(GeomError::DegenerateSet);
    }
    let mut dist = f64::INFINITY;
    for &p in e {
        for &q in f {
            dist = dist.min(metric.distance(p, q));
        }
    }
    Ok(dist / de.min(df))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_examples() {
        assert_eq!(chordal_distance(ExtPoint::new(0.0, 0.0), ExtPoint::Infinity), 2.0);
        let z = ExtPoint::new(0.3, -1.2);
        assert_eq!(chordal_distance(z, z), 0.0);
        let v = chordal_distance(ExtPoint::new(1.0, 0.0), ExtPoint::new(-1.0, 0.0));
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cross_ratio_examples() {
        let p = |x: f64| ExtPoint::new(x, 0.0);
        let r = cross_ratio(p(0.0), p(1.0), p(2.0), ExtPoint::Infinity, Metric::Euclidean).unwrap();
        assert_eq!(r, 2.0);
        let r = cross_ratio(p(0.0), p(1.0), p(2.0), p(3.0), Metric::Euclidean).unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            cross_ratio(p(0.0), p(1.0), p(0.0), p(3.0), Metric::Euclidean),
            Err(GeomError::DegenerateQuadruple)
        ));
    }

    #[test]
    fn chordal_cross_ratio_with_infinity_matches_euclidean() {
        let p = |x: f64, y: f64| ExtPoint::new(x, y);
        let e = cross_ratio(p(0.0, 0.0), p(1.0, 1.0), p(2.0, -1.0), ExtPoint::Infinity, Metric::Euclidean)
            .unwrap();
        let ch = cross_ratio(p(0.0, 0.0), p(1.0, 1.0), p(2.0, -1.0), ExtPoint::Infinity, Metric::Chordal)
            .unwrap();
        assert!((e - ch).abs() < 1e-12 * e);
    }

    #[test]
    fn relative_distance_of_unit_circles() {
        let circle = |cx: f64| -> Vec<ExtPoint> {
            (0..64)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / 64.0;
                    ExtPoint::new(cx + t.cos(), t.sin())
                })
                .collect()
        };
        let r = relative_distance(&circle(0.0), &circle(3.0), Metric::Euclidean).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let single = vec![ExtPoint::new(0.0, 0.0)];
        assert!(matches!(
            relative_distance(&single, &circle(3.0), Metric::Euclidean),
            Err(GeomError::DegenerateSet)
        ));
    }

    #[test]
    fn json_round_trip() {
        let pts = vec![ExtPoint::new(0.1, -3.5e-7), ExtPoint::Infinity];
        let s = serde_json::to_string(&pts).unwrap();
        assert_eq!(s, r#"[[0.1,-3.5e-7],"inf"]"#);
        let back: Vec<ExtPoint> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, pts);
    }

    use proptest::prelude::*;

    fn planar() -> impl Strategy<Value = ExtPoint> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| ExtPoint::new(x, y))
    }

    fn separated(p: &[ExtPoint], min: f64) -> bool {
        let f: Vec<_> = p.iter().map(|z| z.finite().unwrap()).collect();
        (0..f.len()).all(|i| (i + 1..f.len()).all(|j| (f[i] - f[j]).norm() > min))
    }

    proptest! {
        #[test]
        fn chordal_is_a_metric(a in planar(), b in planar(), c in planar()) {
            prop_assert_eq!(chordal_distance(a, b), chordal_distance(b, a));
            prop_assert!(chordal_distance(a, c) <= chordal_distance(a, b) + chordal_distance(b, c) + 1e-12);
            prop_assert!(chordal_distance(a, ExtPoint::Infinity) <= 2.0);
        }

        #[test]
        fn euclidean_and_chordal_cross_ratios_agree(q in prop::array::uniform4(planar())) {
            prop_assume!(separated(&q, 1e-3));
            let e = cross_ratio(q[0], q[1], q[2], q[3], Metric::Euclidean).unwrap();
            let ch = cross_ratio(q[0], q[1], q[2], q[3], Metric::Chordal).unwrap();
            prop_assert!((e - ch).abs() <= 1e-9 * e, "{} vs {}", e, ch);
        }
    }
}
