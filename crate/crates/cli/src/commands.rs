use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use qcpair_core::dilatation::{pl_dilatation, ring_modulus, RingSpec};
use qcpair_core::distortion::{pair_verdict, PairVerdict, VerdictOptions};
use qcpair_core::extensions::{
    annulus_extend_general, annulus_extend_large, annulus_extend_unit, ba_extend, dyadic_pl_extend,
    trapezoid_strip_extend, AnnulusOptions, BoundaryHomeo, LargeOptions, PLMap,
};
use qcpair_core::geom::{ExtPoint, GeomError, Rect, Region, Scene};
use qcpair_core::io::{
    distance_matrix_csv, mesh_from_json, mesh_to_json, profile_layer, render_svg, round_json, scene_layers, Layer,
    LayerStyle, RenderSpec,
};
use qcpair_core::metric::{metric_table, Connectivity, DensityModel, GridSpec};
use qcpair_core::scenarios::{by_name, default_suite, run as run_bundle, run_all, ScenarioBundle, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("{failed} scenario expectation(s) failed")]
    ScenarioFailures { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::InvalidScene(_) => 65,
            CliError::Write { .. } => 74,
            CliError::ScenarioFailures { .. } => 1,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "qcpair", version, about = "Relative metrics, distortion profiles and quasiconformal extensions")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of relative hyperbolic distances between boundary samples (CSV).
    Metric(MetricArgs),
    /// Empirical quasi-Möbius profile of a pair.
    Verdict(VerdictArgs),
    /// Extend a boundary homeomorphism to a PL mesh.
    Extend(ExtendArgs),
    /// Exact dilatation of a PL mesh.
    Dilatation(DilatationArgs),
    /// Conformal modulus of a ring domain.
    Modulus(ModulusArgs),
    /// Build, run or list bundled scenarios.
    Scenario(ScenarioArgs),
    /// Draw scenes, meshes and profiles as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid step; defaults to the scenario's or 0.01.
    #[arg(long)]
    h: Option<f64>,
    /// Neighbours per node, 8 or 16.
    #[arg(long)]
    connectivity: Option<u32>,
    /// Grid window as xmin xmax ymin ymax.
    #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["XMIN", "XMAX", "YMIN", "YMAX"])]
    window: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Scene or scenario bundle JSON.
    #[arg(long)]
    scene: PathBuf,
    /// Region names as U,V.
    #[arg(long)]
    pair: String,
    /// Sample set on the boundary of V.
    #[arg(long)]
    samples: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerdictArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    pair: String,
    #[arg(long)]
    samples: String,
    /// Number of sampled quadruples.
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
    #[arg(long, default_value_t = 100.0)]
    threshold: f64,
    /// Pole p of the chart z -> 1/(z - p), as x,y.
    #[arg(long, allow_hyphen_values = true)]
    chart_pole: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExtendKind {
    Dyadic,
    Strip,
    Annulus,
    AnnulusLarge,
    Ba,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    #[arg(long, value_enum)]
    kind: ExtendKind,
    /// Boundary map JSON: one map for dyadic and ba, {"bottom","top"} for
    /// strip, {"inner","outer"} plus optional "n", "m", "c0" for annuli.
    #[arg(long)]
    boundary: PathBuf,
    /// Integer parameter window a b.
    #[arg(long, num_args = 2, allow_hyphen_values = true, default_values_t = [-4, 4])]
    window: Vec<i64>,
    #[arg(long, default_value_t = 8)]
    depth: u32,
    /// Allowed corner-distance spread for strip and annulus cells.
    #[arg(long, default_value_t = 128.0)]
    spread: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DilatationArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Include the per-triangle values.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModulusArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Region names as inner,outer.
    #[arg(long)]
    ring: String,
    #[arg(long, default_value_t = 0.005)]
    h: f64,
    /// Always use the solver, even for round rings.
    #[arg(long)]
    numeric: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario to build.
    #[arg(long, conflicts_with = "run_all")]
    name: Option<String>,
    /// Run the default suite.
    #[arg(long)]
    run_all: bool,
    /// Run the named scenario instead of printing its bundle.
    #[arg(long)]
    run: bool,
    /// List scenario names.
    #[arg(long)]
    list: bool,
    /// Where --run-all writes its report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Extra parameters as key=value.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Verdict JSON; draws log10 eta_hat against log10 t.
    #[arg(long)]
    verdict: Option<PathBuf>,
    /// Dashed reference circle as x,y,r; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    circle: Vec<String>,
    /// Layer style as name=color[:width[:dashed]]; repeatable.
    #[arg(long)]
    style: Vec<String>,
    #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["XMIN", "XMAX", "YMIN", "YMAX"])]
    window: Option<Vec<f64>>,
    /// Grid lines per axis.
    #[arg(long, default_value_t = 0)]
    grid: u32,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 800)]
    height: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Metric(a) => metric(a),
        Command::Verdict(a) => verdict(a, seed),
        Command::Extend(a) => extend(a, seed),
        Command::Dilatation(a) => dilatation(a),
        Command::Modulus(a) => modulus(a),
        Command::Scenario(a) => scenario(a, seed),
        Command::Render(a) => render(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Write { path: p.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Pretty JSON with numbers rounded to 9 significant digits.
fn report_json(x: &impl Serialize) -> String {
    let mut v = serde_json::to_value(x).expect("report serializes");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// A scene file, or a scenario bundle whose grid becomes the default.
fn load_scene(path: &Path) -> Result<(Scene, Option<GridSpec>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::InvalidScene(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::InvalidScene(e.to_string()))?;
    if v.get("scene").is_some() {
        let b = ScenarioBundle::from_json(&text).map_err(|e| CliError::InvalidScene(e.to_string()))?;
        Ok((b.scene, Some(b.grid)))
    } else {
        let s = Scene::from_json(&text).map_err(|e| match e {
            GeomError::InvalidScene(m) => CliError::InvalidScene(m),
            other => CliError::InvalidScene(other.to_string()),
        })?;
        Ok((s, None))
    }
}

fn split_pair(s: &str, what: &str) -> Result<(String, String), CliError> {
    match s.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => Ok((a.trim().into(), b.trim().into())),
        _ => Err(invalid(format!("--{what} must be two names separated by a comma, got {s:?}"))),
    }
}

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("--{what} expects {n} comma-separated numbers, got {s:?}")))?;
    if v.len() != n {
        return Err(invalid(format!("--{what} expects {n} comma-separated numbers, got {s:?}")));
    }
    Ok(v)
}

fn window_rect(w: &[f64]) -> Result<Rect, CliError> {
    let r = Rect::new(w[0], w[1], w[2], w[3]);
    if !r.is_valid() || !(r.width() > 0.0 && r.height() > 0.0) {
        return Err(invalid(format!("window {w:?} must have xmin < xmax and ymin < ymax")));
    }
    Ok(r)
}

fn grid_spec(base: Option<GridSpec>, a: &GridArgs) -> Result<GridSpec, CliError> {
    let mut g = base.unwrap_or_default();
    if let Some(h) = a.h {
        if !(h > 0.0) {
            return Err(invalid(format!("grid step h = {h} must be positive")));
        }
        g.h = h;
    }
    if let Some(n) = a.connectivity {
        g.connectivity =
            Connectivity::from_count(n).ok_or_else(|| invalid(format!("connectivity must be 8 or 16, got {n}")))?;
    }
    if let Some(w) = &a.window {
        g.window = Some(window_rect(w)?);
    }
    Ok(g)
}

fn region<'a>(scene: &'a Scene, name: &str) -> Result<&'a Region, CliError> {
    scene.region(name).map_err(invalid)
}

fn samples(scene: &Scene, name: &str) -> Result<Vec<ExtPoint>, CliError> {
    Ok(scene.samples(name).map_err(invalid)?.points.clone())
}

fn metric(a: MetricArgs) -> Result<(), CliError> {
    let (scene, base) = load_scene(&a.scene)?;
    let (u, v) = split_pair(&a.pair, "pair")?;
    let (ru, rv) = (region(&scene, &u)?, region(&scene, &v)?);
    let pts = samples(&scene, &a.samples)?;
    let spec = grid_spec(base, &a.grid)?;
    let table = metric_table(ru, rv, &pts, &spec, DensityModel::best_for(&ru.complement())).map_err(invalid)?;
    emit(a.out.as_deref(), &distance_matrix_csv(&table))
}

fn verdict(a: VerdictArgs, seed: u64) -> Result<(), CliError> {
    let (scene, base) = load_scene(&a.scene)?;
    let (u, v) = split_pair(&a.pair, "pair")?;
    let (ru, rv) = (region(&scene, &u)?, region(&scene, &v)?);
    let pts = samples(&scene, &a.samples)?;
    let spec = grid_spec(base, &a.grid)?;
    let chart_pole = match &a.chart_pole {
        Some(s) => {
            let p = floats(s, 2, "chart-pole")?;
            Some([p[0], p[1]])
        }
        None => None,
    };
    let opts = VerdictOptions { budget: a.budget, seed, threshold: a.threshold, chart_pole, ..Default::default() };
    let verdict = pair_verdict(ru, rv, &pts, &spec, &opts).map_err(invalid)?;
    emit(a.out.as_deref(), &report_json(&verdict))
}

fn homeo(v: &Value, what: &str) -> Result<BoundaryHomeo, CliError> {
    let mut h: BoundaryHomeo =
        serde_json::from_value(v.clone()).map_err(|e| invalid(format!("boundary map {what}: {e}")))?;
    h.prepare().map_err(|e| invalid(format!("boundary map {what}: {e}")))?;
    Ok(h)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| invalid(format!("boundary file needs a {key:?} entry")))
}

/// Uniform triangulation of `[a, b] × [0, 1]` with `n` cells per unit.
fn strip_grid(a: i64, b: i64, n: usize) -> (Vec<Complex64>, Vec<[usize; 3]>) {
    let cols = (b - a) as usize * n;
    let idx = |i: usize, j: usize| j * (cols + 1) + i;
    let mut vertices = Vec::with_capacity((cols + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=cols {
            vertices.push(Complex64::new(a as f64 + i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut triangles = Vec::with_capacity(2 * cols * n);
    for j in 0..n {
        for i in 0..cols {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    (vertices, triangles)
}

fn extend(a: ExtendArgs, seed: u64) -> Result<(), CliError> {
    let text = read(&a.boundary)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("boundary file: {e}")))?;
    let (lo, hi) = (a.window[0], a.window[1]);
    if hi <= lo {
        return Err(invalid(format!("window [{lo}, {hi}] is empty")));
    }
    let opts = AnnulusOptions { depth: a.depth, spread: a.spread, ..Default::default() };
    let mesh: PLMap = match a.kind {
        ExtendKind::Dyadic => dyadic_pl_extend(&homeo(&v, "")?, (lo, hi), a.depth).map_err(invalid)?,
        ExtendKind::Strip => {
            let (bottom, top) = (homeo(field(&v, "bottom")?, "bottom")?, homeo(field(&v, "top")?, "top")?);
            trapezoid_strip_extend(&bottom, &top, (lo, hi), a.depth, a.spread).map_err(invalid)?
        }
        ExtendKind::Annulus => {
            let (inner, outer) = (homeo(field(&v, "inner")?, "inner")?, homeo(field(&v, "outer")?, "outer")?);
            match (v.get("n").and_then(Value::as_u64), v.get("m").and_then(Value::as_f64)) {
                (Some(n), _) => annulus_extend_unit(&inner, &outer, n as u32, &opts).map_err(invalid)?,
                (None, Some(m)) => annulus_extend_general(&inner, &outer, m, &opts).map_err(invalid)?,
                (None, None) => return Err(invalid("annulus boundary file needs \"n\" or \"m\"")),
            }
        }
        ExtendKind::AnnulusLarge => {
            let (inner, outer) = (homeo(field(&v, "inner")?, "inner")?, homeo(field(&v, "outer")?, "outer")?);
            let c0 = field(&v, "c0")?.as_f64().ok_or_else(|| invalid("\"c0\" must be a number"))?;
            let opts = LargeOptions { annulus: opts, seed, ..Default::default() };
            let ext = annulus_extend_large(&inner, &outer, c0, &opts).map_err(invalid)?;
            let mut s = serde_json::to_string(&ext).expect("extension serializes");
            s.push('\n');
            return emit(a.out.as_deref(), &s);
        }
        ExtendKind::Ba => {
            let h = homeo(&v, "")?;
            let n = 1usize << a.depth.min(4);
            let (vertices, triangles) = strip_grid(lo, hi, n);
            let image_vertices = ba_extend(&h, &vertices).map_err(invalid)?;
            PLMap { vertices, triangles, image_vertices, depth: a.depth, period: h.period }
        }
    };
    let mut s = mesh_to_json(&mesh);
    s.push('\n');
    emit(a.out.as_deref(), &s)
}

#[derive(Serialize)]
struct DilatationSummary {
    max_k: f64,
    worst: Option<usize>,
    triangles: usize,
    reversed: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_triangle: Option<Vec<f64>>,
}

fn dilatation(a: DilatationArgs) -> Result<(), CliError> {
    let mesh = mesh_from_json(&read(&a.mesh)?).map_err(invalid)?;
    let r = pl_dilatation(&mesh).map_err(invalid)?;
    let summary = DilatationSummary {
        max_k: r.max_k,
        worst: r.worst,
        triangles: mesh.len(),
        reversed: r.reversed,
        per_triangle: a.full.then_some(r.per_element),
    };
    emit(a.out.as_deref(), &report_json(&summary))
}

fn modulus(a: ModulusArgs) -> Result<(), CliError> {
    let (scene, _) = load_scene(&a.scene)?;
    let (i, o) = split_pair(&a.ring, "ring")?;
    let mut spec = RingSpec::new(region(&scene, &i)?.clone(), region(&scene, &o)?.clone(), a.h);
    if a.numeric {
        spec = spec.numeric();
    }
    let report = ring_modulus(&spec).map_err(invalid)?;
    emit(a.out.as_deref(), &report_json(&report))
}

fn scenario_params(a: &ScenarioArgs, seed: u64) -> Result<BTreeMap<String, String>, CliError> {
    let mut p = BTreeMap::new();
    p.insert("seed".to_string(), seed.to_string());
    let flags = [
        ("gap", a.gap),
        ("alpha", a.alpha),
        ("r", a.r),
        ("R", a.big_r),
        ("delta", a.delta),
        ("distance", a.distance),
        ("half_width", a.half_width),
        ("k", a.k),
        ("amplitude", a.amplitude),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            p.insert(k.to_string(), v.to_string());
        }
    }
    for kv in &a.params {
        let (k, v) = kv.split_once('=').ok_or_else(|| invalid(format!("--param expects key=value, got {kv:?}")))?;
        p.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(p)
}

fn scenario_error(e: ScenarioError) -> CliError {
    match e {
        ScenarioError::Geom(GeomError::InvalidScene(m)) => CliError::InvalidScene(m),
        other => invalid(other),
    }
}

fn scenario(a: ScenarioArgs, seed: u64) -> Result<(), CliError> {
    if a.list {
        let names: String = qcpair_core::scenarios::SCENARIO_NAMES.iter().map(|n| format!("{n}\n")).collect();
        return emit(a.out.as_deref(), &names);
    }
    if a.run_all {
        let suite = default_suite().map_err(scenario_error)?;
        let reports = run_all(&suite).into_iter().collect::<Result<Vec<_>, _>>().map_err(scenario_error)?;
        let failed: usize = reports.iter().map(|r| r.failed).sum();
        emit(a.report.as_deref().or(a.out.as_deref()), &report_json(&reports))?;
        for r in &reports {
            eprintln!("{:<16} {:>3} passed {:>3} failed {:>8.1}s", r.name, r.passed, r.failed, r.seconds);
        }
        return if failed == 0 { Ok(()) } else { Err(CliError::ScenarioFailures { failed }) };
    }
    let name = a.name.as_deref().ok_or_else(|| invalid("scenario needs --name, --run-all or --list"))?;
    let bundle = by_name(name, &scenario_params(&a, seed)?).map_err(scenario_error)?;
    if a.run {
        let report = run_bundle(&bundle).map_err(scenario_error)?;
        let failed = report.failed;
        emit(a.report.as_deref().or(a.out.as_deref()), &report_json(&report))?;
        return if failed == 0 { Ok(()) } else { Err(CliError::ScenarioFailures { failed }) };
    }
    let mut s = bundle.to_json();
    s.push('\n');
    emit(a.out.as_deref(), &s)
}

fn parse_style(s: &str) -> Result<(String, LayerStyle), CliError> {
    let bad = || invalid(format!("--style expects name=color[:width[:dashed]], got {s:?}"));
    let (name, rest) = s.split_once('=').ok_or_else(bad)?;
    let mut parts = rest.split(':');
    let stroke = parts.next().filter(|c| !c.is_empty()).ok_or_else(bad)?;
    let width = match parts.next() {
        Some(w) => w.parse::<f64>().ok().filter(|w| *w > 0.0).ok_or_else(bad)?,
        None => 1.5,
    };
    let dashed = match parts.next() {
        None => false,
        Some("dashed") => true,
        Some(_) => return Err(bad()),
    };
    Ok((name.to_string(), LayerStyle { stroke: stroke.to_string(), width, dashed }))
}

fn render(a: RenderArgs) -> Result<(), CliError> {
    let mut layers: Vec<Layer> = Vec::new();
    if let Some(p) = &a.scene {
        layers.extend(scene_layers(&load_scene(p)?.0));
    }
    if let Some(p) = &a.mesh {
        layers.push(Layer::Mesh { name: "mesh".into(), mesh: mesh_from_json(&read(p)?).map_err(invalid)? });
    }
    if let Some(p) = &a.verdict {
        let v: PairVerdict = serde_json::from_str(&read(p)?).map_err(|e| invalid(format!("verdict file: {e}")))?;
        layers.push(profile_layer("eta_hat", &v.profile));
    }
    let mut styles = BTreeMap::new();
    for (k, c) in a.circle.iter().enumerate() {
        let f = floats(c, 3, "circle")?;
        if !(f[2] > 0.0) {
            return Err(invalid(format!("--circle radius must be positive, got {}", f[2])));
        }
        let name = format!("reference{k}");
        styles.insert(name.clone(), LayerStyle::dashed("#888888", 1.0));
        layers.push(Layer::Circle { name, center: Complex64::new(f[0], f[1]), radius: f[2] });
    }
    for s in &a.style {
        let (k, v) = parse_style(s)?;
        styles.insert(k, v);
    }
    let base = RenderSpec { styles, grid_lines: a.grid, width_px: a.width, height_px: a.height, ..Default::default() };
    let spec = match &a.window {
        Some(w) => RenderSpec { window: window_rect(w)?, ..base },
        None => base.fit(&layers),
    };
    let svg = render_svg(&layers, &spec).map_err(invalid)?;
    emit(a.out.as_deref(), &svg)
}
