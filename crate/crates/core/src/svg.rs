//! Standalone SVG plots built from styled layers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{BBox, Vec2};
use crate::io::write_file;

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub stroke: String,
    /// Stroke width in units of 1/1000 of the plot size.
    pub width: f64,
    pub dash: Option<(f64, f64)>,
    pub dot_radius: f64,
}

impl Style {
    pub fn solid(stroke: &str, width: f64) -> Self {
        Style {
            stroke: stroke.into(),
            width,
            dash: None,
            dot_radius: 3.0 * width,
        }
    }

    pub fn dashed(stroke: &str, width: f64) -> Self {
        Style {
            dash: Some((6.0 * width, 4.0 * width)),
            ..Style::solid(stroke, width)
        }
    }
}

/// Arrow from `from` to `to`; drawn for branches running off to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrow {
    pub from: Vec2,
    pub to: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub style: Style,
    pub paths: Vec<(Vec<Vec2>, bool)>,
    pub dots: Vec<Vec2>,
    pub arrows: Vec<Arrow>,
}

impl Layer {
    pub fn new(name: &str, style: Style) -> Self {
        Layer {
            name: name.into(),
            style,
            paths: Vec::new(),
            dots: Vec::new(),
            arrows: Vec::new(),
        }
    }

    pub fn with_path(mut self, points: Vec<Vec2>, closed: bool) -> Self {
        self.paths.push((points, closed));
        self
    }

    fn points(&self) -> impl Iterator<Item = &Vec2> {
        self.paths
            .iter()
            .flat_map(|(p, _)| p.iter())
            .chain(&self.dots)
            .chain(self.arrows.iter().flat_map(|a| [&a.from, &a.to]))
    }

    fn is_empty(&self) -> bool {
        self.paths.iter().all(|(p, _)| p.is_empty()) && self.dots.is_empty() && self.arrows.is_empty()
    }
}

/// Plot size in SVG user units along the longer side.
const CANVAS: f64 = 1000.0;

/// SVG text for `layers`, with the view box fitted to all layer data plus a
/// 5% margin. Output is a pure function of the input.
pub fn render_svg(layers: &[Layer]) -> Result<String> {
    if layers.is_empty() || layers.iter().all(Layer::is_empty) {
        return Err(Error::Config("nothing to plot: every layer is empty".into()));
    }
    let bbox = BBox::from_points(layers.iter().flat_map(|l| l.points())).expect("some layer has points");
    if !(bbox.min.is_finite() && bbox.max.is_finite()) {
        return Err(Error::Config("plot data contains non-finite coordinates".into()));
    }
    let span = bbox.width().max(bbox.height()).max(f64::MIN_POSITIVE);
    let bbox = BBox::new(bbox.center() - Vec2::new(0.5 * span, 0.5 * span), bbox.center() + Vec2::new(0.5 * span, 0.5 * span))
        .expanded(0.05);
    let scale = CANVAS / bbox.width();
    // y grows downwards in SVG
    let map = |p: Vec2| ((p.x - bbox.min.x) * scale, (bbox.max.y - p.y) * scale);
    let size = CANVAS;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#);
    let mut defs = String::new();
    for (i, l) in layers.iter().enumerate() {
        if !l.arrows.is_empty() {
            let _ = writeln!(
                defs,
                r#"<marker id="arrow{i}" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="{}"/></marker>"#,
                l.style.stroke
            );
        }
    }
    if !defs.is_empty() {
        let _ = write!(s, "<defs>\n{defs}</defs>\n");
    }
    for (i, l) in layers.iter().enumerate() {
        let w = l.style.width;
        let dash = l
            .style
            .dash
            .map(|(a, b)| format!(r#" stroke-dasharray="{} {}""#, num(a), num(b)))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<g id="{}" fill="none" stroke="{}" stroke-width="{}" stroke-linejoin="round" stroke-linecap="round"{dash}>"#,
            escape(&l.name),
            l.style.stroke,
            num(w)
        );
        for (pts, closed) in &l.paths {
            if pts.len() < 2 {
                continue;
            }
            let mut d = String::new();
            for (j, p) in pts.iter().enumerate() {
                let (x, y) = map(*p);
                let _ = write!(d, "{}{},{}", if j == 0 { "M" } else { " L" }, num(x), num(y));
            }
            if *closed {
                d.push_str(" Z");
            }
            let _ = writeln!(s, r#"<path d="{d}"/>"#);
        }
        for p in &l.dots {
            let (x, y) = map(*p);
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{}" stroke="none"/>"#,
                num(x),
                num(y),
                num(l.style.dot_radius),
                l.style.stroke
            );
        }
        for a in &l.arrows {
            let (x1, y1) = map(a.from);
            let (x2, y2) = map(a.to);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-dasharray="none" marker-end="url(#arrow{i})"/>"#,
                num(x1),
                num(y1),
                num(x2),
                num(y2)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(layers: &[Layer], path: &Path) -> Result<()> {
    write_file(path, render_svg(layers)?.as_bytes())
}

fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
