use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metric::DistanceMatrix;

use super::DistortionError;

/// Smallest and largest bin exponents: bins are `2^k` for `k` in this range.
pub const MIN_EXP: i32 = -10;
pub const MAX_EXP: i32 = 10;
const NBINS: usize = (MAX_EXP - MIN_EXP + 1) as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Triples,
    Quadruples,
}

/// Empirical distortion function over dyadic ratio bins.
///
/// Bin `k` collects source ratios in `[2^(k-1/2), 2^(k+1/2))`; ratios beyond
/// the end bins are clamped into them and counted in `clamped`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionProfile {
    pub kind: ProfileKind,
    pub bins: Vec<f64>,
    /// Largest target ratio seen in each bin.
    pub eta_hat: Vec<Option<f64>>,
    /// Source ratio of the tuple that realized `eta_hat`.
    pub source_ratio: Vec<Option<f64>>,
    pub witness: Vec<Option<Vec<usize>>>,
    pub sample_count: usize,
    pub skipped: usize,
    pub clamped: usize,
    pub exhaustive: bool,
    pub seed: u64,
}

fn bin_index(t: f64) -> (usize, bool) {
    let k = t.log2().round();
    if k < MIN_EXP as f64 {
        (0, true)
    } else if k > MAX_EXP as f64 {
        (NBINS - 1, true)
    } else {
        ((k as i32 - MIN_EXP) as usize, false)
    }
}

impl DistortionProfile {
    pub fn bin_of(t: f64) -> usize {
        bin_index(t).0
    }

    /// `eta_hat` in the bin containing `t`.
    pub fn eta_at(&self, t: f64) -> Option<f64> {
        self.eta_hat[bin_index(t).0]
    }

    pub fn eta_one(&self) -> Option<f64> {
        self.eta_at(1.0)
    }

    /// Running maximum of `eta_hat` over increasing bins.
    pub fn envelope(&self) -> Vec<Option<f64>> {
        let mut cur: Option<f64> = None;
        self.eta_hat
            .iter()
            .map(|e| {
                if let Some(v) = e {
                    cur = Some(cur.map_or(*v, |c: f64| c.max(*v)));
                }
                cur
            })
            .collect()
    }

    /// Bins that received at least one tuple.
    pub fn realized(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.bins.iter().zip(&self.eta_hat).filter_map(|(t, e)| e.map(|e| (*t, e)))
    }

    /// Log-log slope of `eta_hat` between the two largest realized bins.
    pub fn end_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.realized().collect();
        if pts.len() < 2 {
            return None;
        }
        let (t1, e1) = pts[pts.len() - 2];
        let (t2, e2) = pts[pts.len() - 1];
        Some((e2 / e1).ln() / (t2 / t1).ln())
    }
}

#[derive(Clone, Copy)]
struct Entry {
    eta: f64,
    src: f64,
    order: u64,
    tuple: [usize; 4],
}

#[derive(Clone)]
struct Acc {
    best: [Option<Entry>; NBINS],
    count: usize,
    skipped: usize,
    clamped: usize,
}

impl Acc {
    fn new() -> Self {
        Acc { best: [None; NBINS], count: 0, skipped: 0, clamped: 0 }
    }

    fn push(&mut self, src: f64, tgt: f64, order: u64, tuple: [usize; 4]) {
        if !(src.is_finite() && tgt.is_finite()) || src <= 0.0 {
            self.skipped += 1;
            return;
        }
        self.count += 1;
        let (b, clamped) = bin_index(src);
        if clamped {
            self.clamped += 1;
        }
        let e = Entry { eta: tgt, src, order, tuple };
        match &self.best[b] {
            Some(cur) if cur.eta > tgt || (cur.eta == tgt && cur.order < order) => {}
            _ => self.best[b] = Some(e),
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.count += other.count;
        self.skipped += other.skipped;
        self.clamped += other.clamped;
        for (b, o) in other.best.iter().enumerate() {
            if let Some(o) = o {
                self.push_entry(b, *o);
            }
        }
        self
    }

    fn push_entry(&mut self, b: usize, e: Entry) {
        match &self.best[b] {
            Some(cur) if cur.eta > e.eta || (cur.eta == e.eta && cur.order < e.order) => {}
            _ => self.best[b] = Some(e),
        }
    }

    fn finish(self, kind: ProfileKind, exhaustive: bool, seed: u64) -> DistortionProfile {
        let arity = match kind {
            ProfileKind::Triples => 3,
            ProfileKind::Quadruples => 4,
        };
        DistortionProfile {
            kind,
            bins: (MIN_EXP..=MAX_EXP).map(|k| 2f64.powi(k)).collect(),
            eta_hat: self.best.iter().map(|e| e.map(|e| e.eta)).collect(),
            source_ratio: self.best.iter().map(|e| e.map(|e| e.src)).collect(),
            witness: self.best.iter().map(|e| e.map(|e| e.tuple[..arity].to_vec())).collect(),
            sample_count: self.count,
            skipped: self.skipped,
            clamped: self.clamped,
            exhaustive,
            seed,
        }
    }
}

#[inline]
fn triple_ratio(d: &DistanceMatrix, a: usize, b: usize, c: usize) -> f64 {
    d.get(a, b) / d.get(a, c)
}

#[inline]
fn cr_factor(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        x
    }
}

/// Cross-ratio `[a,b,c,d]` read from a distance matrix; infinite entries are dropped.
#[inline]
pub fn matrix_cross_ratio(m: &DistanceMatrix, a: usize, b: usize, c: usize, d: usize) -> f64 {
    cr_factor(m.get(a, c)) * cr_factor(m.get(b, d)) / (cr_factor(m.get(a, d)) * cr_factor(m.get(b, c)))
}

// Index tuples used when exhaustive enumeration exceeds the budget:
// dyadic-spaced tuples first, then seeded uniform ones.
fn sampled_tuples(n: usize, arity: usize, budget: usize, seed: u64) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(budget);
    let mut steps = vec![];
    let mut s = 1usize;
    while s < n {
        steps.push(s);
        s *= 2;
    }
    let structured_cap = budget / 2;
    'outer: for a in 0..n {
        for &s1 in &steps {
            for &s2 in &steps {
                if out.len() >= structured_cap {
                    break 'outer;
                }
                let b = (a + s1) % n;
                let c = (a + n - s2 % n) % n;
                let d = (b + s2) % n;
                let t = [a, b, c, d];
                let distinct = (0..arity).all(|i| (i + 1..arity).all(|j| t[i] != t[j]));
                if distinct {
                    out.push(t);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < budget {
        let mut t = [0usize; 4];
        for i in 0..arity {
            loop {
                let x = rng.gen_range(0..n);
                if !t[..i].contains(&x) {
                    t[i] = x;
                    break;
                }
            }
        }
        out.push(t);
    }
    out
}

fn check_sizes(src: &DistanceMatrix, tgt: &DistanceMatrix, min: usize) -> Result<usize, DistortionError> {
    if src.n() != tgt.n() {
        return Err(DistortionError::SizeMismatch(src.n(), tgt.n()));
    }
    if src.n() < min {
        return Err(DistortionError::TooFewSamples { got: src.n(), need: min });
    }
    Ok(src.n())
}

/// Quasisymmetric distortion profile of the map `i ↦ i` from `src` to `tgt`.
///
/// Evaluates `d(a,b)/d(a,c)` on both sides over ordered triples: all of them
/// when they fit in `budget`, otherwise a deterministic sample.
pub fn qs_profile(
    src: &DistanceMatrix,
    tgt: &DistanceMatrix,
    budget: usize,
    seed: u64,
) -> Result<DistortionProfile, DistortionError> {
    let n = check_sizes(src, tgt, 3)?;
    let total = n * (n - 1) * (n - 2);
    if total <= budget {
        let acc = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut acc = Acc::new();
                for b in 0..n {
                    for c in 0..n {
                        if a == b || b == c || a == c {
                            continue;
                        }
                        let order = ((a * n + b) * n + c) as u64;
                        acc.push(triple_ratio(src, a, b, c), triple_ratio(tgt, a, b, c), order, [a, b, c, 0]);
                    }
                }
                acc
            })
            .reduce(Acc::new, Acc::merge);
        return Ok(acc.finish(ProfileKind::Triples, true, seed));
    }
    let tuples = sampled_tuples(n, 3, budget, seed);
    let acc = tuples
        .par_iter()
        .enumerate()
        .fold(Acc::new, |mut acc, (k, t)| {
            acc.push(triple_ratio(src, t[0], t[1], t[2]), triple_ratio(tgt, t[0], t[1], t[2]), k as u64, *t);
            acc
        })
        .reduce(Acc::new, Acc::merge);
    Ok(acc.finish(ProfileKind::Triples, false, seed))
}

/// Quasi-Möbius distortion profile: cross-ratios of quadruples on both sides.
pub fn qm_profile(
    src: &DistanceMatrix,
    tgt: &DistanceMatrix,
    budget: usize,
    seed: u64,
) -> Result<DistortionProfile, DistortionError> {
    let n = check_sizes(src, tgt, 4)?;
    let total = n * (n - 1) * (n - 2) * (n - 3);
    if total <= budget {
        let acc = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut acc = Acc::new();
                for b in 0..n {
                    if b == a {
                        continue;
                    }
                    for c in 0..n {
                        if c == a || c == b {
                            continue;
                        }
                        for d in 0..n {
                            if d == a || d == b || d == c {
                                continue;
                            }
                            let order = (((a * n + b) * n + c) * n + d) as u64;
                            acc.push(
                                matrix_cross_ratio(src, a, b, c, d),
                                matrix_cross_ratio(tgt, a, b, c, d),
                                order,
                                [a, b, c, d],
                            );
                        }
                    }
                }
                acc
            })
            .reduce(Acc::new, Acc::merge);
        return Ok(acc.finish(ProfileKind::Quadruples, true, seed));
    }
    let tuples = sampled_tuples(n, 4, budget, seed);
    let acc = tuples
        .par_iter()
        .enumerate()
        .fold(Acc::new, |mut acc, (k, t)| {
            acc.push(
                matrix_cross_ratio(src, t[0], t[1], t[2], t[3]),
                matrix_cross_ratio(tgt, t[0], t[1], t[2], t[3]),
                k as u64,
                *t,
            );
            acc
        })
        .reduce(Acc::new, Acc::merge);
    Ok(acc.finish(ProfileKind::Quadruples, false, seed))
}

/// Supremum of an increasing function's three-point ratio over a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsRatio {
    pub value: f64,
    pub x: f64,
    pub t: f64,
}

/// `(F(x+t) − F(x)) / (F(x) − F(x−t))` at a single point.
pub fn qs_ratio_at(f: impl Fn(f64) -> f64, x: f64, t: f64) -> f64 {
    let fx = f(x);
    (f(x + t) - fx) / (fx - f(x - t))
}

/// Supremum over grid points `x` and grid offsets `t` of
/// `(F(x+t) − F(x)) / (F(x) − F(x−t))`, with `x ± t` inside `[lo, hi]`.
pub fn increasing_qs_ratio(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<QsRatio, DistortionError> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(DistortionError::InvalidInput(format!("domain [{lo}, {hi}] with step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for i in 1..fs.len() {
        if !(fs[i] > fs[i - 1]) {
            return Err(DistortionError::NotMonotone { x: xs[i] });
        }
    }
    let best = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut best = QsRatio { value: f64::NEG_INFINITY, x: xs[i], t: step };
            let kmax = i.min(n - i);
            for k in 1..=kmax {
                let r = (fs[i + k] - fs[i]) / (fs[i] - fs[i - k]);
                if r > best.value {
                    best = QsRatio { value: r, x: xs[i], t: step * k as f64 };
                }
            }
            best
        })
        .reduce(
            || QsRatio { value: f64::NEG_INFINITY, x: lo, t: step },
            |a, b| if b.value > a.value || (b.value == a.value && b.x < a.x) { b } else { a },
        );
    if !best.value.is_finite() {
        return Err(DistortionError::TooFewSamples { got: xs.len(), need: 3 });
    }
    Ok(best)
}
