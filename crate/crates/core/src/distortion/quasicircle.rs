use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DistortionError;

/// Largest number of quadruples evaluated exactly for the cross-ratio bound.
const QUADRUPLE_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasicircleReport {
    /// Max over sample pairs of (diameter of the shorter arc) / chord.
    pub three_point_l: f64,
    pub worst_pair: (usize, usize),
    /// Min cross-ratio over cyclically ordered quadruples.
    pub min_cross_ratio_delta: f64,
    pub worst_quadruple: [usize; 4],
    /// Max over sample pairs of (length of the shorter arc) / chord.
    pub chord_arc: f64,
    pub samples: usize,
}

/// Ahlfors three-point constant and cross-ratio lower bound of a closed curve
/// given by cyclically ordered samples.
///
/// For each pair, the arc with fewer samples between its endpoints is used;
/// on a tie the arc running forward from the first index wins.
pub fn quasicircle_constants(z: &[Complex64]) -> Result<QuasicircleReport, DistortionError> {
    let n = z.len();
    if n < 8 {
        return Err(DistortionError::TooFewSamples { got: n, need: 8 });
    }
    let seg: Vec<f64> = (0..n).map(|i| (z[(i + 1) % n] - z[i]).norm()).collect();
    // (L, pair, chord-arc) for arcs starting at i and running forward
    let per_start: Vec<(f64, (usize, usize), f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut diam = 0.0f64;
            let mut len = 0.0f64;
            let mut best = (0.0f64, (i, i), 0.0f64);
            for k in 1..=n / 2 {
                let j = (i + k) % n;
                for m in 0..k {
                    diam = diam.max((z[(i + m) % n] - z[j]).norm());
                }
                len += seg[(i + k - 1) % n];
                // when both arcs have equal counts only the arc from the smaller index counts
                if 2 * k == n && i > j {
                    continue;
                }
                let chord = (z[i] - z[j]).norm();
                let l = diam / chord;
                if l > best.0 {
                    best.0 = l;
                    best.1 = (i.min(j), i.max(j));
                }
                best.2 = best.2.max(len / chord);
            }
            best
        })
        .collect();
    let mut three_point_l = 0.0;
    let mut worst_pair = (0, 0);
    let mut chord_arc = 0.0f64;
    for (l, pair, ca) in per_start {
        if l > three_point_l {
            three_point_l = l;
            worst_pair = pair;
        }
        chord_arc = chord_arc.max(ca);
    }

    // evenly spaced subsample so that all ordered quadruples fit the budget
    let mut m = n;
    while m >= 4 && choose4(m) > QUADRUPLE_BUDGET {
        m -= 1;
    }
    let idx: Vec<usize> = (0..m).map(|k| k * n / m).collect();
    let (delta, quad) = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut best = (f64::INFINITY, [0usize; 4]);
            for b in a + 1..m {
                for c in b + 1..m {
                    for d in c + 1..m {
                        let (pa, pb, pc, pd) = (z[idx[a]], z[idx[b]], z[idx[c]], z[idx[d]]);
                        let cr = (pa - pc).norm() * (pb - pd).norm() / ((pa - pd).norm() * (pb - pc).norm());
                        if cr < best.0 {
                            best = (cr, [idx[a], idx[b], idx[c], idx[d]]);
                        }
                    }
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, [0; 4]), |x, y| if y.0 < x.0 { y } else { x });

    Ok(QuasicircleReport {
        three_point_l,
        worst_pair,
        min_cross_ratio_delta: delta,
        worst_quadruple: quad,
        chord_arc,
        samples: n,
    })
}

fn choose4(m: usize) -> usize {
    if m < 4 {
        return 0;
    }
    m * (m - 1) / 2 * (m - 2) / 3 * (m - 3) / 4
}
