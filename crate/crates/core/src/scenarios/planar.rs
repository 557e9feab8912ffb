use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{sample_polygon, segment_distance, ExtPoint, Rect, Region, Scene};
use crate::metric::GridSpec;

use super::cusp::CuspMap;
use super::graph::GraphProfile;
use super::{Expectation, Expected, Operation, ScenarioBundle, ScenarioError, VerdictPair};

/// Default relative distances for the squares blow-up ladder.
pub const SQUARES_LADDER: [f64; 3] = [0.2, 0.05, 0.0125];

/// Allowed `max / min` of normalized distances for perturbed scenarios.
const NEAR_SPREAD: f64 = 20.0;

// Polygons standing in for unbounded regions reach this far; the metric
// window stays inside [-8, 8]².
const FAR: f64 = 40.0;

/// Seeded trigonometric perturbation with values in `[-amplitude, amplitude]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    pub modes: u32,
    pub seed: u64,
}

impl Perturbation {
    pub fn flat() -> Self {
        Perturbation { amplitude: 0.0, modes: 0, seed: 0 }
    }

    /// Normalized sum of `modes` sines of period `period / k`, with values
    /// in `[-1, 1]`. `stream` picks an independent draw for the same seed.
    pub fn profile(&self, period: f64, stream: u64) -> impl Fn(f64) -> f64 + Clone {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let terms: Vec<(f64, f64)> =
            (1..=self.modes).map(|k| (rng.gen_range(0.5..1.0) / k as f64, rng.gen_range(0.0..TAU))).collect();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let w = TAU / period;
        move |x: f64| {
            if total == 0.0 {
                return 0.0;
            }
            terms.iter().enumerate().map(|(k, (c, ph))| c * (w * (k + 1) as f64 * x + ph).sin()).sum::<f64>() / total
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(ScenarioError::BandViolation(format!("amplitude {} outside [0, 1]", self.amplitude)));
        }
        Ok(())
    }
}

fn p(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn finite_samples(z: &[Complex64]) -> Vec<ExtPoint> {
    z.iter().map(|&z| ExtPoint::Finite(z)).collect()
}

fn expect(quantity: &str, operation: Operation, expected: Expected, note: &str) -> Expectation {
    Expectation { quantity: quantity.into(), operation, expected, note: note.into() }
}

fn normalized(u: &str, v: &str, samples: &str, scale: f64) -> Operation {
    Operation::NormalizedDistances { u: u.into(), v: v.into(), samples: samples.into(), scale, window: None }
}

fn rel(u: &str, v: &str, z: Complex64, w: Complex64) -> Operation {
    Operation::RelativeDistance { u: u.into(), v: v.into(), z: [z.re, z.im], w: [w.re, w.im] }
}

// Abscissae of graph polygons: step 0.2 on [-10, 10], step 1 out to FAR.
// Inner abscissae are k / 5 so samples at integers hit vertices exactly.
fn graph_xs() -> Vec<f64> {
    let far = FAR as i64;
    let mut xs: Vec<f64> = (-far..-10).map(|k| k as f64).collect();
    xs.extend((-50..=50).map(|k| k as f64 / 5.0));
    xs.extend((11..=far).map(|k| k as f64));
    xs
}

fn min_polyline_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .map(|&z| b.windows(2).map(|s| segment_distance(z, s[0], s[1])).fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

fn closed(v: &[Complex64]) -> Vec<Complex64> {
    let mut c = v.to_vec();
    c.push(v[0]);
    c
}

fn diameter(v: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// `V = {Im z < 0}`, `U = {Im z > gap}`; `d_{V,U}(z, w) = |z − w| / gap` on the real axis.
pub fn parallel_halfplanes(gap: f64) -> Result<ScenarioBundle, ScenarioError> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(ScenarioError::InvalidParameter(format!("gap = {gap}")));
    }
    let mut scene = Scene::default();
    scene.add_region("V", Region::lower(0.0));
    scene.add_region("U", Region::upper(gap));
    let xs = [-2.0, 0.0, 1.0, 3.0, 5.0];
    scene.add_samples("boundary_V", "V", xs.iter().map(|&x| ExtPoint::new(x, 0.0)).collect());
    let mut expected: Vec<Expectation> = [(0.0, 1.0), (0.0, 3.0), (-2.0, 5.0)]
        .iter()
        .map(|&(a, b)| {
            expect(
                &format!("d_VU({a},{b})"),
                rel("U", "V", p(a, 0.0), p(b, 0.0)),
                Expected::Value { value: (b - a) / gap, tol: 0.03 },
                "exact: |z - w| / gap",
            )
        })
        .collect();
    expected.push(expect("d_VU(0,0)", rel("U", "V", p(0.0, 0.0), p(0.0, 0.0)), Expected::Value { value: 0.0, tol: 0.0 }, ""));
    expected.push(expect(
        "d_VU * gap / |z - w|",
        normalized("U", "V", "boundary_V", 1.0 / gap),
        Expected::Band { lo: 0.97, hi: 1.03 },
        "",
    ));
    let grid = if gap > 7.0 {
        GridSpec::default().window(Rect::new(-8.0, 8.0, -1.0, gap + 1.0))
    } else {
        GridSpec::default()
    };
    Ok(ScenarioBundle { name: "parallel".into(), scene, grid, expected, parameters: params(&[("gap", gap)]) })
}

/// `V = D(0, r)`, `U` the exterior of `D(0, R)`.
pub fn concentric_annulus(r: f64, big_r: f64) -> Result<ScenarioBundle, ScenarioError> {
    if !(r > 0.0 && big_r > r && big_r.is_finite()) {
        return Err(ScenarioError::BadRadii { r, big_r });
    }
    let mut scene = Scene::default();
    scene.add_region("V", Region::disk(p(0.0, 0.0), r)?);
    scene.add_region("U", Region::disk(p(0.0, 0.0), big_r)?.complement());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let angles: Vec<f64> = (0..12).map(|j| TAU * j as f64 / 12.0 + rng.gen_range(-0.1..0.1)).collect();
    scene.add_samples("boundary_V", "V", angles.iter().map(|&t| ExtPoint::Finite(Complex64::from_polar(r, t))).collect());
    scene.add_samples(
        "boundary_U",
        "U",
        angles.iter().map(|&t| ExtPoint::Finite(Complex64::from_polar(big_r, t))).collect(),
    );
    let gap = big_r - r;
    let antipodal = TAU * r * big_r / (big_r * big_r - r * r);
    let expected = vec![
        expect(
            "d_VU(r,-r)",
            rel("U", "V", p(r, 0.0), p(-r, 0.0)),
            Expected::Value { value: antipodal, tol: 0.05 },
            "geodesic runs along the inner circle: 2R/(R^2 - r^2) times the arc",
        ),
        expect("d_VU(r,r)", rel("U", "V", p(r, 0.0), p(r, 0.0)), Expected::Value { value: 0.0, tol: 0.0 }, ""),
        expect(
            "d_VU * (R - r) / |z - w|",
            normalized("U", "V", "boundary_V", 1.0 / gap),
            Expected::Band { lo: 1.0, hi: PI },
            "",
        ),
        expect(
            "d_UV(R,-R)",
            rel("V", "U", p(big_r, 0.0), p(-big_r, 0.0)),
            Expected::Value { value: antipodal, tol: 0.05 },
            "inversion swaps the roles of the two circles",
        ),
        expect(
            "d_UV * diam(dU) (R - r) / (diam(dV) |z - w|)",
            normalized("V", "U", "boundary_U", r / (big_r * gap)),
            Expected::Band { lo: 1.0, hi: PI },
            "",
        ),
    ];
    let grid = if big_r > 7.0 { GridSpec::default().window(Rect::square(big_r + 1.0)) } else { GridSpec::default() };
    Ok(ScenarioBundle {
        name: "concentric".into(),
        scene,
        grid,
        expected,
        parameters: params(&[("r", r), ("R", big_r)]),
    })
}

fn check_k(k: f64) -> Result<(), ScenarioError> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(ScenarioError::InvalidParameter(format!("K = {k} must be at least 1")));
    }
    Ok(())
}

/// Perturbed graphs: `∂V` in `{-LK ≤ Im ≤ 0}` and `∂U` in `{L ≤ Im ≤ L + LK}`.
///
/// A flat perturbation returns the half-plane pair with gap `L`.
pub fn near_parallel_quasidisks(k: f64, l: f64, profile: &Perturbation) -> Result<ScenarioBundle, ScenarioError> {
    check_k(k)?;
    profile.validate()?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(ScenarioError::InvalidParameter(format!("L = {l}")));
    }
    let ps = params(&[("k", k), ("l", l), ("amplitude", profile.amplitude), ("seed", profile.seed as f64)]);
    if profile.amplitude == 0.0 {
        let mut b = parallel_halfplanes(l)?;
        b.name = "near_parallel".into();
        b.parameters = ps;
        return Ok(b);
    }
    let (pv, pu) = (profile.profile(8.0, 0), profile.profile(8.0, 1));
    let a = 0.5 * l * k * profile.amplitude;
    let gv = move |x: f64| -a * (1.0 + pv(x));
    let gu = move |x: f64| l + a * (1.0 + pu(x));
    let xs = graph_xs();
    let lower: Vec<Complex64> = xs.iter().map(|&x| p(x, gv(x))).collect();
    let upper: Vec<Complex64> = xs.iter().map(|&x| p(x, gu(x))).collect();
    let tol = 1e-12 * (1.0 + l * k);
    if lower.iter().any(|z| z.im < -l * k - tol || z.im > tol) || upper.iter().any(|z| z.im < l - tol || z.im > l + l * k + tol) {
        return Err(ScenarioError::BandViolation("graph leaves its strip".into()));
    }
    let dist = min_polyline_distance(&lower, &upper);
    let mut v_poly = lower.clone();
    v_poly.extend([p(FAR, -FAR - l * k), p(-FAR, -FAR - l * k)]);
    let mut u_poly = upper.clone();
    u_poly.extend([p(FAR, FAR + l + l * k), p(-FAR, FAR + l + l * k)]);
    let mut scene = Scene::default();
    scene.add_region("V", Region::polygon(v_poly)?);
    scene.add_region("U", Region::polygon(u_poly)?);
    scene.add_samples("boundary_V", "V", (-4..=4).map(|i| ExtPoint::new(i as f64, gv(i as f64))).collect());
    let expected = vec![
        expect(
            "d_VU * dist / |z - w| lower bound",
            normalized("U", "V", "boundary_V", 1.0 / dist),
            Expected::AtLeast { lo: 1.0 / (2.0 * (2.0 * k + 1.0)) },
            "lower comparability constant from the strip containment",
        ),
        expect(
            "d_VU * dist / |z - w| spread",
            normalized("U", "V", "boundary_V", 1.0 / dist),
            Expected::Spread { max: NEAR_SPREAD },
            "comparability constant is not explicit; the spread is bounded instead",
        ),
    ];
    let mut parameters = ps;
    parameters.insert("dist".into(), dist);
    Ok(ScenarioBundle { name: "near_parallel".into(), scene, grid: GridSpec::with_h(0.02), expected, parameters })
}

fn radial_polygon(rho: impl Fn(f64) -> f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let t = TAU * j as f64 / n as f64;
            Complex64::from_polar(rho(t), t)
        })
        .collect()
}

/// Perturbed circles: `∂V` between `max(r − K(R − r), r/K)` and `r`, `∂U`
/// between `R` and `R + K(R − r)`, with `∞ ∈ U`.
///
/// A flat perturbation returns the concentric pair.
pub fn near_concentric_quasidisks(
    k: f64,
    r: f64,
    big_r: f64,
    profile: &Perturbation,
) -> Result<ScenarioBundle, ScenarioError> {
    check_k(k)?;
    profile.validate()?;
    if !(r > 0.0 && big_r > r && big_r.is_finite()) {
        return Err(ScenarioError::BadRadii { r, big_r });
    }
    let ps = params(&[("k", k), ("r", r), ("R", big_r), ("amplitude", profile.amplitude), ("seed", profile.seed as f64)]);
    if profile.amplitude == 0.0 {
        let mut b = concentric_annulus(r, big_r)?;
        b.name = "near_concentric".into();
        b.parameters = ps;
        return Ok(b);
    }
    let gap = big_r - r;
    let inner_floor = (r - k * gap).max(r / k);
    let (pv, pu) = (profile.profile(TAU, 0), profile.profile(TAU, 1));
    let dv = profile.amplitude * (r - inner_floor);
    let du = profile.amplitude * k * gap;
    let n = 240;
    let v_poly = radial_polygon(|t| r - 0.5 * dv * (1.0 + pv(t)), n);
    let u_poly = radial_polygon(|t| big_r + 0.5 * du * (1.0 + pu(t)), n);
    let tol = 1e-12 * big_r;
    if v_poly.iter().any(|z| z.norm() < inner_floor - tol || z.norm() > r + tol)
        || u_poly.iter().any(|z| z.norm() < big_r - tol || z.norm() > big_r + k * gap + tol)
    {
        return Err(ScenarioError::BandViolation("radial profile leaves its annulus".into()));
    }
    let dist = min_polyline_distance(&closed(&v_poly), &closed(&u_poly));
    let (diam_v, diam_u) = (diameter(&v_poly), diameter(&u_poly));
    let mut scene = Scene::default();
    let sv: Vec<Complex64> = v_poly.iter().step_by(20).copied().collect();
    let su: Vec<Complex64> = u_poly.iter().step_by(20).copied().collect();
    scene.add_region("V", Region::polygon(v_poly)?);
    scene.add_region("U", Region::polygon(u_poly)?.complement());
    scene.add_samples("boundary_V", "V", finite_samples(&sv));
    scene.add_samples("boundary_U", "U", finite_samples(&su));
    let expected = vec![
        expect(
            "d_VU * dist / |z - w| lower bound",
            normalized("U", "V", "boundary_V", 1.0 / dist),
            Expected::AtLeast { lo: 1.0 / (2.0 * (2.0 * k + 1.0)) },
            "",
        ),
        expect(
            "d_VU * dist / |z - w| spread",
            normalized("U", "V", "boundary_V", 1.0 / dist),
            Expected::Spread { max: NEAR_SPREAD },
            "",
        ),
        expect(
            "d_UV * diam(dU) dist / (diam(dV) |z - w|) spread",
            normalized("V", "U", "boundary_U", diam_v / (diam_u * dist)),
            Expected::Spread { max: NEAR_SPREAD },
            "",
        ),
    ];
    let mut parameters = ps;
    parameters.insert("dist".into(), dist);
    Ok(ScenarioBundle { name: "near_concentric".into(), scene, grid: GridSpec::with_h(0.02), expected, parameters })
}

/// Core curve of a wormhole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WormholeCore {
    /// Line through the origin at `angle` radians.
    Line { angle: f64 },
    /// Triangle wave `y = amplitude · tri(x / period)` along the real axis.
    Zigzag { amplitude: f64, period: f64 },
}

/// `U` above and `V` below a chord-arc core, with boundary-to-core
/// distances in `[1/K, K]`.
pub fn wormhole(k: f64, core: WormholeCore, profile: &Perturbation) -> Result<ScenarioBundle, ScenarioError> {
    check_k(k)?;
    profile.validate()?;
    let (rot, j, sec): (Complex64, Box<dyn Fn(f64) -> f64>, f64) = match core {
        WormholeCore::Line { angle } => (Complex64::from_polar(1.0, angle), Box::new(|_| 0.0), 1.0),
        WormholeCore::Zigzag { amplitude, period } => {
            if !(period > 0.0) || !amplitude.is_finite() {
                return Err(ScenarioError::InvalidParameter(format!("zigzag period {period}")));
            }
            let slope = 4.0 * amplitude / period;
            (
                Complex64::new(1.0, 0.0),
                Box::new(move |x: f64| amplitude * (2.0 / PI) * (TAU * x / period).sin().asin()),
                slope.hypot(1.0),
            )
        }
    };
    // vertical offsets w·sec keep the normal distance on straight pieces at w
    let (lo, hi) = (1.0 / k, k / sec);
    if lo > hi {
        return Err(ScenarioError::BandViolation(format!("core too steep for K = {k}")));
    }
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * profile.amplitude);
    let (pu, pv) = (profile.profile(8.0, 0), profile.profile(8.0, 1));
    let xs = graph_xs();
    let core_pts: Vec<Complex64> = xs.iter().map(|&x| rot * p(x, j(x))).collect();
    let upper: Vec<Complex64> = xs.iter().map(|&x| rot * p(x, j(x) + sec * (mid + half * pu(x)))).collect();
    let lower: Vec<Complex64> = xs.iter().map(|&x| rot * p(x, j(x) - sec * (mid + half * pv(x)))).collect();
    for (name, curve) in [("U", &upper), ("V", &lower)] {
        for (z, x) in curve.iter().zip(&xs) {
            if x.abs() > 10.0 {
                continue;
            }
            let d = core_pts.windows(2).map(|s| segment_distance(*z, s[0], s[1])).fold(f64::INFINITY, f64::min);
            if d < lo * (1.0 - 1e-9) || d > k * (1.0 + 1e-9) {
                return Err(ScenarioError::BandViolation(format!("boundary of {name} at x = {x} is {d} from the core")));
            }
        }
    }
    let samples: Vec<Complex64> = (-4..=4).map(|i| lower[xs.iter().position(|&x| x == i as f64).expect("integer abscissa")]).collect();
    let mut u_poly = upper;
    u_poly.extend([rot * p(FAR, 2.0 * FAR), rot * p(-FAR, 2.0 * FAR)]);
    let mut v_poly = lower;
    v_poly.extend([rot * p(FAR, -2.0 * FAR), rot * p(-FAR, -2.0 * FAR)]);
    let mut scene = Scene::default();
    scene.add_region("V", Region::polygon(v_poly)?);
    scene.add_region("U", Region::polygon(u_poly)?);
    scene.add_samples("boundary_V", "V", finite_samples(&samples));
    let expected = vec![expect(
        "d_VU / |z - w| spread",
        normalized("U", "V", "boundary_V", 1.0),
        Expected::Spread { max: NEAR_SPREAD },
        "slope band [1/C, C]; C is reported, not prescribed",
    )];
    let mut parameters = params(&[("k", k), ("amplitude", profile.amplitude), ("seed", profile.seed as f64)]);
    match core {
        WormholeCore::Line { angle } => {
            parameters.insert("angle".into(), angle);
        }
        WormholeCore::Zigzag { amplitude, period } => {
            parameters.insert("zigzag_amplitude".into(), amplitude);
            parameters.insert("period".into(), period);
        }
    }
    Ok(ScenarioBundle { name: "wormhole".into(), scene, grid: GridSpec::with_h(0.02), expected, parameters })
}

fn blob(profile: &Perturbation, stream: u64) -> Vec<Complex64> {
    let f = profile.profile(TAU, stream);
    let a = profile.amplitude;
    let v = radial_polygon(|t| 1.0 - 0.15 * a * (1.0 + f(t)), 120);
    let s = 1.0 / diameter(&v);
    v.into_iter().map(|z| z * s).collect()
}

/// Two unit-diameter polygonal quasidisks whose boundaries are `distance` apart.
///
/// `U` is bounded here; the relative metric is Möbius invariant, so moving
/// a point of `U` to infinity changes the comparability constants by a
/// bounded factor only.
pub fn separated_quasidisks(distance: f64, profile: &Perturbation) -> Result<ScenarioBundle, ScenarioError> {
    profile.validate()?;
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(ScenarioError::BandViolation(format!("distance {distance} must be positive")));
    }
    let v_poly: Vec<Complex64> = blob(profile, 0).into_iter().map(|z| z - 0.5 * distance - 0.5).collect();
    let u0 = blob(profile, 1);
    let mut shift = 0.5 * distance + 0.5;
    for _ in 0..6 {
        let u: Vec<Complex64> = u0.iter().map(|z| z + shift).collect();
        shift += distance - min_polyline_distance(&closed(&v_poly), &closed(&u));
    }
    let u_poly: Vec<Complex64> = u0.iter().map(|z| z + shift).collect();
    let dist = min_polyline_distance(&closed(&v_poly), &closed(&u_poly));
    let samples: Vec<Complex64> = v_poly.iter().step_by(8).copied().collect();
    let mut scene = Scene::default();
    scene.add_region("V", Region::polygon(v_poly)?);
    scene.add_region("U", Region::polygon(u_poly)?);
    scene.add_samples("boundary_V", "V", finite_samples(&samples));
    let expected = vec![expect(
        "d_VU * dist / |z - w| spread",
        normalized("U", "V", "boundary_V", 1.0 / dist),
        Expected::Spread { max: 20.0 },
        "",
    )];
    let reach = shift + 1.5;
    let grid = if reach > 8.0 { GridSpec::with_h(0.02).window(Rect::square(reach)) } else { GridSpec::with_h(0.02) };
    Ok(ScenarioBundle {
        name: "separated".into(),
        scene,
        grid,
        expected,
        parameters: params(&[("distance", dist), ("amplitude", profile.amplitude), ("seed", profile.seed as f64)]),
    })
}

fn unit_square(x0: f64) -> Vec<Complex64> {
    vec![p(x0, 0.0), p(x0 + 1.0, 0.0), p(x0 + 1.0, 1.0), p(x0, 1.0)]
}

// Far apart pairs are computed in the original chart: after moving U to
// infinity the image of V would be smaller than a grid cell.
const FAR_DELTA: f64 = 10.0;

fn add_square_pair(scene: &mut Scene, suffix: &str, delta: f64) -> Result<VerdictPair, ScenarioError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ScenarioError::InvalidParameter(format!("delta = {delta}")));
    }
    // relative distance = gap / min diameter, and a unit square has diameter √2
    let g = delta * SQRT_2;
    let v = unit_square(0.0);
    let samples = sample_polygon(&v, 48);
    let (vn, un, sn) = (format!("V{suffix}"), format!("U{suffix}"), format!("boundary_V{suffix}"));
    scene.add_region(&vn, Region::polygon(v)?);
    scene.add_region(&un, Region::polygon(unit_square(1.0 + g))?);
    scene.add_samples(&sn, &vn, finite_samples(&samples));
    let chart_pole = (delta < FAR_DELTA).then_some([1.5 + g, 0.5]);
    Ok(VerdictPair { u: un, v: vn, samples: sn, chart_pole })
}

/// Two unit squares at relative distance `delta`.
pub fn squares_pair(delta: f64) -> Result<ScenarioBundle, ScenarioError> {
    let mut scene = Scene::default();
    let pair = add_square_pair(&mut scene, "", delta)?;
    let mut expected = vec![
        expect(
            "eta_hat(1)",
            Operation::EtaOne { pairs: vec![pair], budget: 2_000_000, seed: 0 },
            Expected::Finite,
            "",
        ),
        expect(
            "three-point constant of dV",
            Operation::QuasicircleL { region: "V".into(), samples: 64 },
            Expected::Band { lo: 1.0, hi: 2.0 },
            "sampled three-point ratio; the corner ratio is about 1.14",
        ),
    ];
    let mut grid = GridSpec::default();
    if delta >= FAR_DELTA {
        let g = delta * SQRT_2;
        grid = grid.window(Rect::new(-2.0, 3.0 + g, -2.5, 3.5));
        expected.push(expect(
            "d_VU * dist / |z - w| spread",
            normalized("U", "V", "boundary_V", 1.0 / g),
            Expected::Spread { max: 20.0 },
            "far apart the pair behaves like the separated scenario",
        ));
    }
    Ok(ScenarioBundle { name: "squares".into(), scene, grid, expected, parameters: params(&[("delta", delta)]) })
}

/// Square pairs at decreasing relative distances; `eta_hat(1)` should increase.
pub fn squares_ladder(deltas: &[f64]) -> Result<ScenarioBundle, ScenarioError> {
    if deltas.len() < 2 || deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ScenarioError::InvalidParameter("ladder needs at least two strictly decreasing deltas".into()));
    }
    let mut scene = Scene::default();
    if deltas.iter().any(|&d| d >= FAR_DELTA) {
        return Err(ScenarioError::InvalidParameter(format!("ladder deltas must stay below {FAR_DELTA}")));
    }
    let pairs: Vec<VerdictPair> =
        deltas.iter().enumerate().map(|(i, &d)| add_square_pair(&mut scene, &i.to_string(), d)).collect::<Result<_, _>>()?;
    let expected = vec![expect(
        "eta_hat(1) along the ladder",
        Operation::EtaOne { pairs, budget: 2_000_000, seed: 0 },
        Expected::Increasing,
        "dilatation of any straightening map blows up as the squares touch",
    )];
    let parameters = deltas.iter().enumerate().map(|(i, &d)| (format!("delta{i}"), d)).collect();
    Ok(ScenarioBundle { name: "squares_ladder".into(), scene, grid: GridSpec::default(), expected, parameters })
}

/// `V` the lower half-plane and `U` the region above the graph of `f`.
pub fn lipschitz_graph_pair(profile: GraphProfile, lipschitz: f64) -> Result<ScenarioBundle, ScenarioError> {
    if !profile.positive() {
        return Err(ScenarioError::NotPositive(format!("{profile:?}")));
    }
    if profile.lipschitz() > lipschitz {
        return Err(ScenarioError::LipschitzExceeded { actual: profile.lipschitz(), bound: lipschitz });
    }
    let mut scene = Scene::default();
    scene.add_region("V", Region::lower(0.0));
    let u = match profile {
        GraphProfile::Constant { c } => Region::upper(c),
        _ => {
            let mut v: Vec<Complex64> = graph_xs().into_iter().map(|x| p(x, profile.eval(x))).collect();
            let top = FAR + 5.0;
            v.extend([p(FAR, top), p(-FAR, top)]);
            Region::polygon(v)?
        }
    };
    scene.add_region("U", u);
    scene.add_samples("boundary_V", "V", (-3..=3).map(|i| ExtPoint::new(i as f64, 0.0)).collect());
    let fname = match profile {
        GraphProfile::Constant { .. } => "constant",
        GraphProfile::Power { .. } => "power",
        GraphProfile::Exp => "exp",
    };
    scene.metadata.insert("profile".into(), fname.into());
    let mut expected = Vec::new();
    if let GraphProfile::Constant { c } = profile {
        expected.push(expect(
            "d_VU(0,3)",
            rel("U", "V", p(0.0, 0.0), p(3.0, 0.0)),
            Expected::Value { value: 3.0 / c, tol: 0.03 },
            "reduces to parallel half-planes",
        ));
    }
    match profile {
        GraphProfile::Exp => {
            expected.push(expect(
                "qs ratio of F at (3, 3)",
                Operation::QsRatioAt { profile, x: 3.0, t: 3.0 },
                Expected::Value { value: 3f64.exp(), tol: 1e-9 },
                "",
            ));
            let xs: Vec<f64> = (1..=6).map(f64::from).collect();
            expected.push(expect(
                "qs ratio of F along x = t",
                Operation::QsRatioDiagonal { profile, xs: xs.clone() },
                Expected::Dominates { lower: xs.iter().map(|x| x.exp()).collect() },
                "unbounded, so F is not quasisymmetric",
            ));
        }
        _ => {
            expected.push(expect(
                "d_VU / |F(x) - F(y)| spread",
                Operation::GraphNormalized { u: "U".into(), v: "V".into(), samples: "boundary_V".into(), profile },
                Expected::Spread { max: NEAR_SPREAD },
                "",
            ));
            expected.push(expect(
                "sup qs ratio of F on [-100, 100]",
                Operation::IncreasingQsRatio { profile, lo: -100.0, hi: 100.0, step: 0.5 },
                Expected::Band { lo: 1.0, hi: 10.0 },
                "bounded, so F is quasisymmetric",
            ));
        }
    }
    let mut parameters = params(&[("lipschitz", lipschitz)]);
    match profile {
        GraphProfile::Constant { c } => {
            parameters.insert("c".into(), c);
        }
        GraphProfile::Power { p } => {
            parameters.insert("p".into(), p);
        }
        GraphProfile::Exp => {}
    }
    Ok(ScenarioBundle { name: "lipschitz_graph".into(), scene, grid: GridSpec::with_h(0.02), expected, parameters })
}

/// Straightening of the cusp `y = x^α` onto a semicircle tangent to the real axis.
pub fn cusp_straighten(alpha: f64) -> Result<(ScenarioBundle, CuspMap), ScenarioError> {
    let map = CuspMap::new(alpha)?;
    let n = 200;
    let arc: Vec<Complex64> = (1..=n).map(|k| map.cusp_point(k as f64 / n as f64)).collect();
    let mut poly = vec![p(0.0, 0.0)];
    poly.extend(&arc);
    poly.push(p(0.0, 1.0));
    let mut scene = Scene::default();
    scene.add_region("cusp", Region::polygon(poly)?);
    scene.add_region("target", Region::disk(p(0.0, 0.5), 0.5)?);
    scene.add_samples("cusp_points", "cusp", finite_samples(&arc));
    let expected = vec![
        expect("t(1)", Operation::CuspT { alpha, x: 1.0 }, Expected::Value { value: 0.5, tol: 1e-15 }, ""),
        expect(
            "t s(t) on [1/2, 1e4]",
            Operation::CuspSandwich { alpha, t_max: 1e4, n: 400 },
            Expected::Band { lo: 0.5, hi: 1.0 },
            "1/(2t) <= s(t) <= 1/t",
        ),
        expect(
            "max |h'|",
            Operation::CuspSlope { alpha, t_max: 50.0, n: 20_000 },
            Expected::Band { lo: 0.0, hi: map.lipschitz_bound() },
            "",
        ),
        expect(
            "distance of cusp images to the semicircle",
            Operation::CuspSemicircle { alpha, points: n },
            Expected::Band { lo: 0.0, hi: 0.02 },
            "normalized by the semicircle's diameter",
        ),
        expect(
            "max dilatation of the composed map",
            Operation::CuspDilatation { alpha, nodes: 400, seed: 0 },
            Expected::Finite,
            "",
        ),
    ];
    let bundle = ScenarioBundle {
        name: "cusp".into(),
        scene,
        grid: GridSpec::default(),
        expected,
        parameters: params(&[("alpha", alpha)]),
    };
    Ok((bundle, map))
}

/// The strip `{|Im z| < a}` cut off far away; on the centre line the
/// quasihyperbolic distance is `|z − w| / a`.
pub(crate) fn strip(a: f64) -> Result<ScenarioBundle, ScenarioError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ScenarioError::InvalidParameter(format!("half width {a}")));
    }
    let mut scene = Scene::default();
    scene.add_region("Z", Region::polygon(vec![p(-FAR, -a), p(FAR, -a), p(FAR, a), p(-FAR, a)])?);
    let pairs = [(0.0, 1.0), (0.0, 2.0), (-3.0, 3.0), (-1.0, 4.0), (0.5, 6.0), (-5.0, -2.0), (1.0, 2.5), (-4.0, 0.0), (2.0, 7.0), (-6.0, 6.0)];
    let expected = pairs
        .iter()
        .map(|&(x, y)| {
            expect(
                &format!("k({x},{y})"),
                Operation::QuasihyperbolicDistance { domain: "Z".into(), z: [x, 0.0], w: [y, 0.0] },
                Expected::Value { value: (y - x) / a, tol: 0.03 },
                "",
            )
        })
        .collect();
    Ok(ScenarioBundle {
        name: "strip".into(),
        scene,
        grid: GridSpec::default().window(Rect::new(-8.0, 8.0, -a, a)),
        expected,
        parameters: params(&[("half_width", a)]),
    })
}
