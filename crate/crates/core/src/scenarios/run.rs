use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilatation::numeric_beltrami;
use crate::distortion::{increasing_qs_ratio, pair_verdict, qs_ratio_at, quasicircle_constants, VerdictOptions};
use crate::geom::{ExtPoint, Scene};
use crate::metric::{quasihyperbolic_distance, DensityModel, GridSpec, RelativeMetric};

use super::cusp::CuspMap;
use super::{Expectation, Expected, Operation, ScenarioBundle, ScenarioError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Measured {
    Scalar { value: f64 },
    Range { min: f64, max: f64 },
    Sequence { values: Vec<f64> },
}

impl Measured {
    fn values(&self) -> Vec<f64> {
        match self {
            Measured::Scalar { value } => vec![*value],
            Measured::Range { min, max } => vec![*min, *max],
            Measured::Sequence { values } => values.clone(),
        }
    }

    fn min_max(&self) -> (f64, f64) {
        let v = self.values();
        (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub quantity: String,
    pub measured: Option<Measured>,
    pub expected: Expected,
    pub pass: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub results: Vec<ExpectationResult>,
    pub passed: usize,
    pub failed: usize,
    pub seconds: f64,
}

impl Expected {
    /// Whether a measurement satisfies the expectation.
    pub fn check(&self, m: &Measured) -> bool {
        let vals = m.values();
        if vals.iter().any(|v| v.is_nan()) {
            return false;
        }
        let (lo_m, hi_m) = m.min_max();
        match self {
            Expected::Value { value, tol } => match m {
                Measured::Scalar { value: x } => {
                    if *value == 0.0 {
                        x.abs() <= *tol
                    } else {
                        (x - value).abs() <= tol * value.abs()
                    }
                }
                _ => false,
            },
            Expected::Band { lo, hi } => lo_m >= *lo && hi_m <= *hi,
            Expected::AtLeast { lo } => lo_m >= *lo,
            Expected::Spread { max } => lo_m > 0.0 && hi_m.is_finite() && hi_m / lo_m <= *max,
            Expected::Increasing => match m {
                Measured::Sequence { values } => values.windows(2).all(|w| w[1] > w[0]),
                _ => false,
            },
            Expected::Dominates { lower } => match m {
                Measured::Sequence { values } => {
                    values.len() == lower.len() && values.iter().zip(lower).all(|(v, l)| *v >= l * (1.0 - 1e-12))
                }
                _ => false,
            },
            Expected::Finite => vals.iter().all(|v| v.is_finite()),
        }
    }
}

fn pt(p: [f64; 2]) -> ExtPoint {
    ExtPoint::new(p[0], p[1])
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// Grids are reused across expectations of a bundle.
struct Ctx<'a> {
    scene: &'a Scene,
    grid: GridSpec,
    metrics: HashMap<(String, String, Option<[u64; 4]>), RelativeMetric>,
}

impl<'a> Ctx<'a> {
    fn metric(&mut self, u: &str, v: &str, spec: GridSpec) -> Result<&RelativeMetric, String> {
        let key = (
            u.to_string(),
            v.to_string(),
            spec.window.map(|w| [w.xmin.to_bits(), w.xmax.to_bits(), w.ymin.to_bits(), w.ymax.to_bits()]),
        );
        if !self.metrics.contains_key(&key) {
            let (ru, rv) = (self.scene.region(u).map_err(err)?, self.scene.region(v).map_err(err)?);
            let model = DensityModel::best_for(&ru.complement());
            let m = RelativeMetric::new(ru, rv, &spec, model).map_err(err)?;
            self.metrics.insert(key.clone(), m);
        }
        Ok(&self.metrics[&key])
    }

    fn points(&self, samples: &str) -> Result<Vec<ExtPoint>, String> {
        Ok(self.scene.samples(samples).map_err(err)?.points.clone())
    }

    fn eval(&mut self, op: &Operation) -> Result<Measured, String> {
        let scalar = |value: f64| Measured::Scalar { value };
        match op {
            Operation::QuasihyperbolicDistance { domain, z, w } => {
                let r = self.scene.region(domain).map_err(err)?;
                Ok(scalar(quasihyperbolic_distance(r, pt(*z), pt(*w), &self.grid).map_err(err)?.distance))
            }
            Operation::RelativeDistance { u, v, z, w } => {
                let spec = self.grid;
                let m = self.metric(u, v, spec)?;
                Ok(scalar(m.distance(pt(*z), pt(*w)).map_err(err)?.distance))
            }
            Operation::NormalizedDistances { u, v, samples, scale, window } => {
                let pts = self.points(samples)?;
                let spec = GridSpec { window: window.or(self.grid.window), ..self.grid };
                let table = self.metric(u, v, spec)?.table(&pts).map_err(err)?;
                let z: Vec<Complex64> = pts.iter().map(|p| p.finite().ok_or("sample at infinity")).collect::<Result<_, _>>()?;
                range_over_pairs(z.len(), |i, j| {
                    let e = (z[i] - z[j]).norm();
                    (e > 0.0).then(|| table.get(i, j) / (scale * e))
                })
            }
            Operation::GraphNormalized { u, v, samples, profile } => {
                let pts = self.points(samples)?;
                let spec = self.grid;
                let table = self.metric(u, v, spec)?.table(&pts).map_err(err)?;
                let f: Vec<f64> = pts.iter().map(|p| p.finite().map(|z| profile.antiderivative(z.re))).collect::<Option<_>>().ok_or("sample at infinity")?;
                range_over_pairs(f.len(), |i, j| {
                    let e = (f[i] - f[j]).abs();
                    (e > 0.0).then(|| table.get(i, j) / e)
                })
            }
            Operation::QsRatioAt { profile, x, t } => Ok(scalar(qs_ratio_at(|s| profile.antiderivative(s), *x, *t))),
            Operation::QsRatioDiagonal { profile, xs } => Ok(Measured::Sequence {
                values: xs.iter().map(|&x| qs_ratio_at(|s| profile.antiderivative(s), x, x)).collect(),
            }),
            Operation::IncreasingQsRatio { profile, lo, hi, step } => {
                let r = increasing_qs_ratio(|s| profile.antiderivative(s), *lo, *hi, *step).map_err(err)?;
                Ok(scalar(r.value))
            }
            Operation::QuasicircleL { region, samples } => {
                let z = self.scene.region(region).map_err(err)?.boundary_samples(*samples).map_err(err)?;
                Ok(scalar(quasicircle_constants(&z).map_err(err)?.three_point_l))
            }
            Operation::EtaOne { pairs, budget, seed } => {
                let opts0 = VerdictOptions { budget: *budget, seed: *seed, ..Default::default() };
                let mut values = Vec::with_capacity(pairs.len());
                for p in pairs {
                    let (u, v) = (self.scene.region(&p.u).map_err(err)?, self.scene.region(&p.v).map_err(err)?);
                    let pts = self.points(&p.samples)?;
                    let opts = VerdictOptions { chart_pole: p.chart_pole, ..opts0.clone() };
                    let verdict = pair_verdict(u, v, &pts, &self.grid, &opts).map_err(err)?;
                    values.push(verdict.eta_one.unwrap_or(f64::NAN));
                }
                Ok(Measured::Sequence { values })
            }
            Operation::CuspT { alpha, x } => Ok(scalar(CuspMap::new(*alpha).map_err(err)?.t(*x))),
            Operation::CuspSandwich { alpha, t_max, n } => {
                let (min, max) = CuspMap::new(*alpha).map_err(err)?.sandwich_range(*t_max, *n);
                Ok(Measured::Range { min, max })
            }
            Operation::CuspSlope { alpha, t_max, n } => Ok(scalar(CuspMap::new(*alpha).map_err(err)?.max_slope(*t_max, *n))),
            Operation::CuspSemicircle { alpha, points } => {
                let (dev, wrong) = CuspMap::new(*alpha).map_err(err)?.semicircle_deviation(*points);
                Ok(scalar(if wrong > 0 { f64::INFINITY } else { dev }))
            }
            Operation::CuspDilatation { alpha, nodes, seed } => {
                let m = CuspMap::new(*alpha).map_err(err)?;
                Ok(scalar(cusp_dilatation(&m, *nodes, *seed)?))
            }
        }
    }
}

/// Max pointwise dilatation of the cusp map at seeded nodes in `0.05 < |z| < 1`.
pub(crate) fn cusp_dilatation(m: &CuspMap, nodes: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Complex64> = (0..nodes)
        .map(|_| Complex64::from_polar(rng.gen_range(0.05..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    Ok(numeric_beltrami(|z| m.apply(z), &pts, None).map_err(err)?.max_k)
}

fn range_over_pairs(n: usize, f: impl Fn(usize, usize) -> Option<f64>) -> Result<Measured, String> {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            if let Some(r) = f(i, j) {
                min = min.min(r);
                max = max.max(r);
            }
        }
    }
    if min > max {
        return Err("no pair of distinct samples".into());
    }
    Ok(Measured::Range { min, max })
}

fn check_one(ctx: &mut Ctx, e: &Expectation) -> ExpectationResult {
    let start = Instant::now();
    let (measured, error) = match ctx.eval(&e.operation) {
        Ok(m) => (Some(m), None),
        Err(s) => (None, Some(s)),
    };
    let pass = measured.as_ref().map_or(false, |m| e.expected.check(m));
    ExpectationResult {
        quantity: e.quantity.clone(),
        measured,
        expected: e.expected.clone(),
        pass,
        error,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Evaluates every expectation of a bundle at the bundle's grid resolution.
pub fn run(bundle: &ScenarioBundle) -> Result<ScenarioReport, ScenarioError> {
    bundle.scene.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx { scene: &bundle.scene, grid: bundle.grid, metrics: HashMap::new() };
    let results: Vec<ExpectationResult> = bundle.expected.iter().map(|e| check_one(&mut ctx, e)).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    Ok(ScenarioReport {
        name: bundle.name.clone(),
        failed: results.len() - passed,
        passed,
        results,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs bundles in parallel; reports come back in input order.
pub fn run_all(bundles: &[ScenarioBundle]) -> Vec<Result<ScenarioReport, ScenarioError>> {
    bundles.par_iter().map(run).collect()
}
