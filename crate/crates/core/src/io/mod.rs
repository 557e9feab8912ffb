//! JSON and CSV interchange and SVG rendering.

mod svg;

pub use svg::{profile_layer, render_svg, scene_layers, Layer, LayerStyle, RenderSpec};

use std::fmt::Write;

use thiserror::Error;

use crate::extensions::{ExtensionError, PLMap};
use crate::metric::DistanceMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("nothing to render")]
    EmptyLayer,
    #[error("invalid render spec: {0}")]
    InvalidSpec(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Mesh(#[from] ExtensionError),
}

/// Formats a number with 9 significant digits, independent of locale.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..9).contains(&e) {
        format!("{:.*}", (8 - e) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

/// CSV with a header row and 9-significant-digit cells.
pub fn table_csv(headers: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt9(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Header row of sample indices, then one row per sample.
pub fn distance_matrix_csv(m: &DistanceMatrix) -> String {
    let header: Vec<String> = (0..m.n()).map(|i| i.to_string()).collect();
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..m.n() {
        let row: Vec<String> = (0..m.n()).map(|j| fmt9(m.get(i, j))).collect();
        writeln!(out, "{}", row.join(",")).expect("writing to a string");
    }
    out
}

/// Rounds every non-integer number in a JSON tree to 9 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(r) = n.as_f64().and_then(|x| fmt9(x).parse().ok()).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn mesh_to_json(m: &PLMap) -> String {
    serde_json::to_string(m).expect("mesh serializes")
}

/// Parses and validates a mesh.
pub fn mesh_from_json(s: &str) -> Result<PLMap, IoError> {
    let m: PLMap = serde_json::from_str(s).map_err(|e| IoError::Json(e.to_string()))?;
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(3.0), "3.00000000");
        assert_eq!(fmt9(-0.012345678912), "-0.0123456789");
        assert_eq!(fmt9(123456.789), "123456.789");
        assert_eq!(fmt9(6.02e23), "6.02000000e23");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(table_csv(&["a", "b"], &[vec![1.0, 0.5]]), "a,b\n1.00000000,0.500000000\n");
        let m = DistanceMatrix::from_fn(2, |i, j| (i + j) as f64 / 3.0);
        assert_eq!(distance_matrix_csv(&m), "0,1\n0,0.333333333\n0.333333333,0\n");
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 7], "b": {"c": 2.0e-7}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.333333333,7],"b":{"c":2e-7}}"#);
    }

    #[test]
    fn mesh_round_trip() {
        let m = PLMap {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.1, 1.0 / 3.0)],
            triangles: vec![[0, 1, 2]],
            image_vertices: vec![c(0.0, 0.0), c(std::f64::consts::PI, 0.0), c(0.0, 1e-300)],
            depth: 2,
            period: Some(1),
        };
        assert_eq!(mesh_from_json(&mesh_to_json(&m)).unwrap(), m);
        assert!(matches!(mesh_from_json("{"), Err(IoError::Json(_))));
    }


    use proptest::prelude::*;

    proptest! {
        #[test]
        fn arbitrary_images_round_trip(img in prop::collection::vec((any::<f64>(), any::<f64>()), 3), period in prop::option::of(1u32..8)) {
            prop_assume!(img.iter().all(|(x, y)| x.is_finite() && y.is_finite()));
            let m = PLMap {
                vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.1, 1.0 / 3.0)],
                triangles: vec![[0, 1, 2]],
                image_vertices: img.iter().map(|&(x, y)| c(x, y)).collect(),
                depth: 3,
                period,
            };
            prop_assert_eq!(mesh_from_json(&mesh_to_json(&m)).unwrap(), m);
        }
    }
}
