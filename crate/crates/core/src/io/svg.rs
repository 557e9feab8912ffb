use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distortion::DistortionProfile;
use crate::extensions::PLMap;
use crate::geom::{Rect, Region, RegionKind, Scene};

use super::IoError;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStyle {
    pub stroke: String,
    pub width: f64,
    #[serde(default)]
    pub dashed: bool,
}

impl LayerStyle {
    pub fn solid(stroke: &str, width: f64) -> Self {
        LayerStyle { stroke: stroke.into(), width, dashed: false }
    }

    pub fn dashed(stroke: &str, width: f64) -> Self {
        LayerStyle { stroke: stroke.into(), width, dashed: true }
    }
}

/// Drawing window, per-layer styles, grid overlay and output size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub window: Rect,
    /// Styles by layer name; unnamed layers cycle through a fixed palette.
    #[serde(default)]
    pub styles: BTreeMap<String, LayerStyle>,
    /// Grid lines per axis; 0 disables the overlay.
    #[serde(default)]
    pub grid_lines: u32,
    pub width_px: u32,
    pub height_px: u32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { window: Rect::square(8.0), styles: BTreeMap::new(), grid_lines: 0, width_px: 800, height_px: 800 }
    }
}

impl RenderSpec {
    fn validate(&self) -> Result<(), IoError> {
        let w = &self.window;
        if !(w.width() > 0.0 && w.height() > 0.0) || !w.is_valid() {
            return Err(IoError::InvalidSpec(format!("window {w:?} has no area")));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(IoError::InvalidSpec("output size must be positive".into()));
        }
        Ok(())
    }

    /// Same spec with the window fitted around the finite content of `layers`.
    pub fn fit(mut self, layers: &[Layer]) -> Self {
        let pts: Vec<Complex64> = layers.iter().flat_map(|l| l.extent()).collect();
        if let Some(b) = Rect::bounding(&pts) {
            let pad = 0.05 * b.width().max(b.height()).max(1e-9);
            self.window = b.expand(pad);
        }
        self
    }
}

/// Something to draw.
#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Region { name: String, region: Region },
    Circle { name: String, center: Complex64, radius: f64 },
    Polyline { name: String, points: Vec<Complex64>, closed: bool },
    Points { name: String, points: Vec<Complex64> },
    /// Drawn twice: source triangles on the left, image triangles on the right.
    Mesh { name: String, mesh: PLMap },
}

impl Layer {
    pub fn name(&self) -> &str {
        match self {
            Layer::Region { name, .. }
            | Layer::Circle { name, .. }
            | Layer::Polyline { name, .. }
            | Layer::Points { name, .. }
            | Layer::Mesh { name, .. } => name,
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Layer::Region { .. } | Layer::Circle { .. } => false,
            Layer::Polyline { points, .. } | Layer::Points { points, .. } => points.is_empty(),
            Layer::Mesh { mesh, .. } => mesh.is_empty(),
        }
    }

    // Points that should be visible when fitting the window.
    fn extent(&self) -> Vec<Complex64> {
        match self {
            Layer::Region { region, .. } => region
                .boundary_bbox()
                .map(|b| vec![Complex64::new(b.xmin, b.ymin), Complex64::new(b.xmax, b.ymax)])
                .unwrap_or_default(),
            Layer::Circle { center, radius, .. } => vec![center - Complex64::new(*radius, *radius), center + Complex64::new(*radius, *radius)],
            Layer::Polyline { points, .. } | Layer::Points { points, .. } => points.clone(),
            Layer::Mesh { mesh, .. } => mesh.vertices.clone(),
        }
    }
}

/// One layer per region and per sample set of a scene.
pub fn scene_layers(scene: &Scene) -> Vec<Layer> {
    let mut out: Vec<Layer> =
        scene.regions.iter().map(|r| Layer::Region { name: r.name.clone(), region: r.region.clone() }).collect();
    for s in &scene.samples {
        out.push(Layer::Points { name: s.name.clone(), points: s.points.iter().filter_map(|p| p.finite()).collect() });
    }
    out
}

/// `log10 eta_hat` against `log10 t` over the realized bins.
pub fn profile_layer(name: &str, profile: &DistortionProfile) -> Layer {
    Layer::Polyline {
        name: name.into(),
        points: profile.realized().map(|(t, e)| Complex64::new(t.log10(), e.log10())).collect(),
        closed: false,
    }
}

struct Panel {
    window: Rect,
    x0: f64,
    w: f64,
    h: f64,
}

impl Panel {
    fn px(&self, z: Complex64) -> (f64, f64) {
        (
            self.x0 + (z.re - self.window.xmin) / self.window.width() * self.w,
            (self.window.ymax - z.im) / self.window.height() * self.h,
        )
    }

    fn scale(&self) -> f64 {
        self.w / self.window.width()
    }

    fn path(&self, pts: &[Complex64], closed: bool) -> String {
        let mut d = String::new();
        for (i, &z) in pts.iter().enumerate() {
            let (x, y) = self.px(z);
            write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" }).expect("write");
        }
        if closed {
            d.push_str(" Z");
        }
        d
    }
}

fn style_for(spec: &RenderSpec, name: &str, index: usize, default_width: f64) -> LayerStyle {
    spec.styles
        .get(name)
        .cloned()
        .unwrap_or_else(|| LayerStyle::solid(PALETTE[index % PALETTE.len()], default_width))
}

fn group_open(out: &mut String, name: &str, panel: &str, style: &LayerStyle) {
    let dash = if style.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    writeln!(
        out,
        "<g id=\"{}-{panel}\" clip-path=\"url(#clip-{panel})\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{dash}>",
        escape(name),
        escape(&style.stroke),
        style.width
    )
    .expect("write");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn draw_region(out: &mut String, panel: &Panel, region: &Region) {
    match &region.kind {
        RegionKind::HalfPlane { normal, offset } => {
            let base = normal * *offset;
            let dir = Complex64::new(-normal.im, normal.re);
            let w = &panel.window;
            let centre = Complex64::new(0.5 * (w.xmin + w.xmax), 0.5 * (w.ymin + w.ymax));
            let reach = w.width().hypot(w.height()) + (base - centre).norm();
            writeln!(out, "<path d=\"{}\"/>", panel.path(&[base - dir * reach, base + dir * reach], false)).expect("write");
        }
        RegionKind::Disk { center, radius } => {
            let (x, y) = panel.px(*center);
            writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\"/>", radius * panel.scale()).expect("write");
        }
        RegionKind::PolyJordan { vertices, .. } => {
            writeln!(out, "<path d=\"{}\"/>", panel.path(vertices, true)).expect("write");
        }
    }
}

/// Renders layers into a standalone SVG document.
///
/// Element order follows layer order, so equal input gives identical output.
pub fn render_svg(layers: &[Layer], spec: &RenderSpec) -> Result<String, IoError> {
    spec.validate()?;
    if layers.is_empty() || layers.iter().any(Layer::is_empty) {
        return Err(IoError::EmptyLayer);
    }
    let (w, h) = (spec.width_px as f64, spec.height_px as f64);
    let left = Panel { window: spec.window, x0: 0.0, w, h };
    let images: Vec<Complex64> = layers
        .iter()
        .filter_map(|l| match l {
            Layer::Mesh { mesh, .. } => Some(mesh.image_vertices.iter().copied()),
            _ => None,
        })
        .flatten()
        .collect();
    let right = Rect::bounding(&images).map(|b| {
        let side = b.width().max(b.height()) * 1.05;
        let (cx, cy) = (0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax));
        // keep the source panel's aspect ratio
        let aspect = spec.window.height() / spec.window.width();
        let (hw, hh) = if aspect <= 1.0 { (0.5 * side, 0.5 * side * aspect) } else { (0.5 * side / aspect, 0.5 * side) };
        let hw = hw.max(0.5 * b.width() * 1.05);
        let hh = hh.max(0.5 * b.height() * 1.05);
        Panel { window: Rect::new(cx - hw, cx + hw, cy - hh, cy + hh), x0: w, w, h }
    });
    let total_w = if right.is_some() { 2.0 * w } else { w };
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{h}\" viewBox=\"0 0 {total_w} {h}\">"
    )
    .expect("write");
    out.push_str("<defs>\n");
    writeln!(out, "<clipPath id=\"clip-source\"><rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\"/></clipPath>").expect("write");
    if right.is_some() {
        writeln!(out, "<clipPath id=\"clip-image\"><rect x=\"{w}\" y=\"0\" width=\"{w}\" height=\"{h}\"/></clipPath>")
            .expect("write");
    }
    out.push_str("</defs>\n");
    writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{total_w}\" height=\"{h}\" fill=\"white\"/>").expect("write");
    if spec.grid_lines > 0 {
        out.push_str("<g id=\"grid\" stroke=\"#dddddd\" stroke-width=\"0.5\">\n");
        for panel in std::iter::once(&left).chain(right.as_ref()) {
            for k in 0..=spec.grid_lines {
                let f = k as f64 / spec.grid_lines as f64;
                let x = panel.x0 + f * panel.w;
                let y = f * panel.h;
                writeln!(out, "<line x1=\"{x:.2}\" y1=\"0\" x2=\"{x:.2}\" y2=\"{h}\"/>").expect("write");
                writeln!(out, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\"/>", panel.x0, panel.x0 + panel.w)
                    .expect("write");
            }
        }
        out.push_str("</g>\n");
    }
    for (i, layer) in layers.iter().enumerate() {
        let mesh = matches!(layer, Layer::Mesh { .. });
        let style = style_for(spec, layer.name(), i, if mesh { 0.4 } else { 1.5 });
        group_open(&mut out, layer.name(), "source", &style);
        match layer {
            Layer::Region { region, .. } => draw_region(&mut out, &left, region),
            Layer::Circle { center, radius, .. } => {
                let (x, y) = left.px(*center);
                writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\"/>", radius * left.scale()).expect("write");
            }
            Layer::Polyline { points, closed, .. } => {
                writeln!(out, "<path d=\"{}\"/>", left.path(points, *closed)).expect("write");
            }
            Layer::Points { points, .. } => {
                for &z in points {
                    let (x, y) = left.px(z);
                    writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2\"/>").expect("write");
                }
            }
            Layer::Mesh { mesh, .. } => {
                for t in 0..mesh.len() {
                    writeln!(out, "<path d=\"{}\"/>", left.path(&mesh.source_triangle(t), true)).expect("write");
                }
            }
        }
        out.push_str("</g>\n");
        if let (Layer::Mesh { mesh, .. }, Some(panel)) = (layer, right.as_ref()) {
            group_open(&mut out, layer.name(), "image", &style);
            for t in 0..mesh.len() {
                writeln!(out, "<path d=\"{}\"/>", panel.path(&mesh.image_triangle(t), true)).expect("write");
            }
            out.push_str("</g>\n");
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(render_svg(&[], &RenderSpec::default()), Err(IoError::EmptyLayer));
        let l = Layer::Points { name: "p".into(), points: vec![] };
        assert_eq!(render_svg(&[l], &RenderSpec::default()), Err(IoError::EmptyLayer));
        let bad = RenderSpec { width_px: 0, ..Default::default() };
        let l = Layer::Circle { name: "c".into(), center: c(0.0, 0.0), radius: 1.0 };
        assert!(matches!(render_svg(&[l], &bad), Err(IoError::InvalidSpec(_))));
    }

    #[test]
    fn deterministic_and_styled() {
        let layers = vec![
            Layer::Region { name: "V".into(), region: Region::disk(c(0.0, 0.0), 1.0).unwrap() },
            Layer::Circle { name: "reference".into(), center: c(0.0, 0.0), radius: 2.0 },
            Layer::Region { name: "H".into(), region: Region::upper(0.5) },
        ];
        let mut spec = RenderSpec { grid_lines: 4, ..Default::default() };
        spec.styles.insert("reference".into(), LayerStyle::dashed("#888888", 1.0));
        let a = render_svg(&layers, &spec).unwrap();
        assert_eq!(a, render_svg(&layers, &spec).unwrap());
        assert!(a.contains("stroke-dasharray"));
        assert_eq!(a.matches("<circle").count(), 2);
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn mesh_is_drawn_twice() {
        let mesh = PLMap {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            triangles: vec![[0, 1, 2]],
            image_vertices: vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)],
            depth: 0,
            period: None,
        };
        let layers = [Layer::Mesh { name: "m".into(), mesh }];
        let spec = RenderSpec::default().fit(&layers);
        let s = render_svg(&layers, &spec).unwrap();
        assert_eq!(s.matches("<path").count(), 2);
        assert!(s.contains("width=\"1600\""));
    }
}
