//! Worked configurations bundled with the values or bands they should
//! reproduce, and a runner that checks them.

mod cusp;
mod graph;
mod planar;
mod run;

pub use cusp::CuspMap;
pub use graph::GraphProfile;
pub use planar::{
    concentric_annulus, cusp_straighten, lipschitz_graph_pair, near_concentric_quasidisks, near_parallel_quasidisks,
    parallel_halfplanes, separated_quasidisks, squares_ladder, squares_pair, wormhole, Perturbation, WormholeCore,
    SQUARES_LADDER,
};
pub use run::{run, run_all, ExpectationResult, Measured, ScenarioReport};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{GeomError, Rect, Scene};
use crate::metric::GridSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("radii must satisfy 0 < r < R, got r = {r}, R = {big_r}")]
    BadRadii { r: f64, big_r: f64 },
    #[error("perturbed boundary leaves its band: {0}")]
    BandViolation(String),
    #[error("height function must be positive: {0}")]
    NotPositive(String),
    #[error("cusp exponent must exceed 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("Lipschitz constant {actual} exceeds the bound {bound}")]
    LipschitzExceeded { actual: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A scene plus the quantities it is expected to reproduce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBundle {
    pub name: String,
    pub scene: Scene,
    /// Default resolution for the metric computations.
    pub grid: GridSpec,
    pub expected: Vec<Expectation>,
    pub parameters: BTreeMap<String, f64>,
}

impl ScenarioBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        let b: ScenarioBundle = serde_json::from_str(s).map_err(|e| GeomError::InvalidScene(e.to_string()))?;
        b.scene.validate()?;
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub quantity: String,
    pub operation: Operation,
    pub expected: Expected,
    #[serde(default)]
    pub note: String,
}

/// A pair to run the verdict on, by region and sample-set name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictPair {
    pub u: String,
    pub v: String,
    pub samples: String,
    pub chart_pole: Option<[f64; 2]>,
}

/// Computation producing a measured quantity. Region and sample names refer
/// to the bundle's scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    /// Quasihyperbolic distance `k_Ω(z, w)` in a region.
    QuasihyperbolicDistance { domain: String, z: [f64; 2], w: [f64; 2] },
    /// `d_{V,U}(z, w)`.
    RelativeDistance { u: String, v: String, z: [f64; 2], w: [f64; 2] },
    /// Range of `d_{V,U}(z, w) / (scale · |z − w|)` over sample pairs.
    NormalizedDistances {
        u: String,
        v: String,
        samples: String,
        scale: f64,
        #[serde(default)]
        window: Option<Rect>,
    },
    /// Range of `d_{V,U}(z, w) / |F(z) − F(w)|` over real samples.
    GraphNormalized { u: String, v: String, samples: String, profile: GraphProfile },
    /// `(F(x+t) − F(x)) / (F(x) − F(x−t))`.
    QsRatioAt { profile: GraphProfile, x: f64, t: f64 },
    /// The ratio at `t = x` for each `x`.
    QsRatioDiagonal { profile: GraphProfile, xs: Vec<f64> },
    /// Grid supremum of the ratio on `[lo, hi]`.
    IncreasingQsRatio { profile: GraphProfile, lo: f64, hi: f64, step: f64 },
    /// Three-point constant of a region's boundary.
    QuasicircleL { region: String, samples: usize },
    /// `eta_hat(1)` of the pair verdict, one value per pair.
    EtaOne { pairs: Vec<VerdictPair>, budget: usize, seed: u64 },
    CuspT { alpha: f64, x: f64 },
    /// Range of `t · s(t)`.
    CuspSandwich { alpha: f64, t_max: f64, n: usize },
    /// Largest `|h'|`.
    CuspSlope { alpha: f64, t_max: f64, n: usize },
    /// Largest distance from cusp images to the target semicircle.
    CuspSemicircle { alpha: f64, points: usize },
    /// Largest pointwise dilatation of the composed map.
    CuspDilatation { alpha: f64, nodes: usize, seed: u64 },
}

/// What a measurement must satisfy.
///
/// `Value` uses a relative tolerance, or an absolute one when the value is 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Expected {
    Value { value: f64, tol: f64 },
    Band { lo: f64, hi: f64 },
    AtLeast { lo: f64 },
    /// `max / min` of a range stays below the bound.
    Spread { max: f64 },
    Increasing,
    /// Each entry of a sequence is at least the matching bound.
    Dominates { lower: Vec<f64> },
    Finite,
}

fn param(p: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, ScenarioError> {
    match p.get(key) {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| ScenarioError::InvalidParameter(format!("{key} = {s:?} is not a number"))),
    }
}

fn perturbation(p: &BTreeMap<String, String>, amplitude: f64) -> Result<Perturbation, ScenarioError> {
    Ok(Perturbation {
        amplitude: param(p, "amplitude", amplitude)?,
        modes: param(p, "modes", 3.0)? as u32,
        seed: param(p, "seed", 0.0)? as u64,
    })
}

/// Names accepted by [`by_name`].
pub const SCENARIO_NAMES: [&str; 11] = [
    "parallel",
    "concentric",
    "near_parallel",
    "near_concentric",
    "wormhole",
    "separated",
    "lipschitz_graph",
    "cusp",
    "squares",
    "squares_ladder",
    "strip",
];

/// Builds a scenario from string parameters, filling in defaults.
pub fn by_name(name: &str, p: &BTreeMap<String, String>) -> Result<ScenarioBundle, ScenarioError> {
    match name {
        "parallel" => parallel_halfplanes(param(p, "gap", 1.0)?),
        "concentric" => concentric_annulus(param(p, "r", 1.0)?, param(p, "R", 2.0)?),
        "near_parallel" => near_parallel_quasidisks(param(p, "k", 2.0)?, param(p, "l", 1.0)?, &perturbation(p, 0.5)?),
        "near_concentric" => near_concentric_quasidisks(
            param(p, "k", 2.0)?,
            param(p, "r", 1.0)?,
            param(p, "R", 2.0)?,
            &perturbation(p, 0.5)?,
        ),
        "wormhole" => {
            let core = match p.get("core").map(String::as_str) {
                None | Some("line") => WormholeCore::Line { angle: param(p, "angle", 0.0)? },
                Some("zigzag") => WormholeCore::Zigzag {
                    amplitude: param(p, "zigzag_amplitude", 1.0)?,
                    period: param(p, "period", 6.0)?,
                },
                Some(other) => return Err(ScenarioError::InvalidParameter(format!("core = {other:?}"))),
            };
            wormhole(param(p, "k", 2.0)?, core, &perturbation(p, 0.5)?)
        }
        "separated" => separated_quasidisks(param(p, "distance", 10.0)?, &perturbation(p, 0.5)?),
        "lipschitz_graph" => {
            let profile = match p.get("profile").map(String::as_str) {
                None | Some("power") => GraphProfile::Power { p: param(p, "p", 1.0)? },
                Some("const") | Some("constant") => GraphProfile::Constant { c: param(p, "c", 1.0)? },
                Some("exp") => GraphProfile::Exp,
                Some(other) => return Err(ScenarioError::InvalidParameter(format!("profile = {other:?}"))),
            };
            lipschitz_graph_pair(profile, param(p, "lipschitz", 1.0)?)
        }
        "cusp" => cusp_straighten(param(p, "alpha", 2.0)?).map(|(b, _)| b),
        "squares" => squares_pair(param(p, "delta", 0.2)?),
        "squares_ladder" => {
            let deltas = match p.get("deltas") {
                None => SQUARES_LADDER.to_vec(),
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ScenarioError::InvalidParameter(format!("deltas = {s:?}")))?,
            };
            squares_ladder(&deltas)
        }
        "strip" => planar::strip(param(p, "half_width", 1.0)?),
        _ => Err(ScenarioError::UnknownScenario(name.to_string())),
    }
}

/// The default suite: every scenario at its default parameters, with the
/// degenerate reductions alongside.
pub fn default_suite() -> Result<Vec<ScenarioBundle>, ScenarioError> {
    let flat = Perturbation { amplitude: 0.0, modes: 3, seed: 0 };
    let bumpy = Perturbation { amplitude: 0.5, modes: 3, seed: 0 };
    let mut out = vec![
        parallel_halfplanes(1.0)?,
        parallel_halfplanes(2.0)?,
        concentric_annulus(1.0, 2.0)?,
        near_parallel_quasidisks(2.0, 1.0, &flat)?,
        near_parallel_quasidisks(2.0, 1.0, &bumpy)?,
        near_concentric_quasidisks(2.0, 1.0, 2.0, &bumpy)?,
        wormhole(2.0, WormholeCore::Line { angle: 0.0 }, &bumpy)?,
        wormhole(2.0, WormholeCore::Zigzag { amplitude: 1.0, period: 6.0 }, &bumpy)?,
        separated_quasidisks(10.0, &bumpy)?,
        lipschitz_graph_pair(GraphProfile::Constant { c: 1.0 }, 1.0)?,
        lipschitz_graph_pair(GraphProfile::Power { p: 1.0 }, 1.0)?,
        lipschitz_graph_pair(GraphProfile::Exp, 1.0)?,
        planar::strip(1.0)?,
    ];
    for alpha in [1.5, 2.0, 3.0] {
        out.push(cusp_straighten(alpha)?.0);
    }
    out.push(squares_pair(10.0)?);
    out.push(squares_ladder(&SQUARES_LADDER)?);
    Ok(out)
}
