//! SVG figures of maps and traced ray families.
//!
//! Output uses only `line`, `circle`, `polyline` and `text` elements inside
//! the `svg` root. Coordinates are printed with three decimals so identical
//! inputs produce identical bytes.

use std::fmt::Write as _;

use thiserror::Error;

use crate::angle::{total_angle, PointKind, DEFAULT_EPS_KIND};
use crate::geom::{BoundingBox, Vec2};
use crate::map::{MapGeometry, VertexIdx};
use crate::trace::TracePath;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("all vertices coincide; nothing to scale")]
    DegenerateExtent,
    #[error("map has no vertices")]
    EmptyMap,
    #[error("canvas must be larger than twice the margin")]
    InvalidStyle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub edge_width: f64,
    pub path_width: f64,
    pub vertex_radius: f64,
    pub elliptic_color: String,
    pub euclidean_color: String,
    pub hyperbolic_color: String,
    pub edge_color: String,
    pub path_color: String,
    pub labels: bool,
    pub eps_kind: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 800.0,
            height: 600.0,
            margin: 40.0,
            edge_width: 1.5,
            path_width: 1.0,
            vertex_radius: 4.0,
            elliptic_color: "blue".into(),
            euclidean_color: "black".into(),
            hyperbolic_color: "red".into(),
            edge_color: "#555555".into(),
            path_color: "#2a9d3a".into(),
            labels: false,
            eps_kind: DEFAULT_EPS_KIND,
        }
    }
}

impl RenderStyle {
    fn color(&self, kind: PointKind) -> &str {
        match kind {
            PointKind::Elliptic => &self.elliptic_color,
            PointKind::Euclidean => &self.euclidean_color,
            PointKind::Hyperbolic => &self.hyperbolic_color,
        }
    }
}

/// Affine map from geometry space into the canvas, y flipped.
struct Frame {
    scale: f64,
    origin: Vec2,
    offset: Vec2,
    height: f64,
}

impl Frame {
    fn new(bb: BoundingBox, style: &RenderStyle) -> Result<Frame, RenderError> {
        let inner_w = style.width - 2.0 * style.margin;
        let inner_h = style.height - 2.0 * style.margin;
        if !(inner_w > 0.0 && inner_h > 0.0) {
            return Err(RenderError::InvalidStyle);
        }
        let (w, h) = (bb.width(), bb.height());
        let scale = match (w > 0.0, h > 0.0) {
            (true, true) => (inner_w / w).min(inner_h / h),
            (true, false) => inner_w / w,
            (false, true) => inner_h / h,
            (false, false) => return Err(RenderError::DegenerateExtent),
        };
        let offset = Vec2::new(
            style.margin + 0.5 * (inner_w - w * scale),
            style.margin + 0.5 * (inner_h - h * scale),
        );
        Ok(Frame {
            scale,
            origin: bb.min,
            offset,
            height: style.height,
        })
    }

    fn apply(&self, p: Vec2) -> (f64, f64) {
        let x = self.offset.x + (p.x - self.origin.x) * self.scale;
        let y = self.offset.y + (p.y - self.origin.y) * self.scale;
        (x, self.height - y)
    }
}

/// Four significant digits.
fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn render_map(map: &MapGeometry, style: &RenderStyle) -> Result<String, RenderError> {
    render_trace(map, &[], style)
}

pub fn render_trace(
    map: &MapGeometry,
    paths: &[TracePath],
    style: &RenderStyle,
) -> Result<String, RenderError> {
    let bb = BoundingBox::around(map.vertices().iter().map(|v| v.position))
        .ok_or(RenderError::EmptyMap)?;
    let bb = paths
        .iter()
        .flat_map(|p| p.waypoints.iter().copied())
        .fold(bb, |acc, p| acc.including(p));
    let frame = Frame::new(bb, style)?;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#,
        w = style.width,
        h = style.height
    );
    for e in map.edges() {
        let (x1, y1) = frame.apply(map.vertex(e.u).position);
        let (x2, y2) = frame.apply(map.vertex(e.v).position);
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{}" stroke-width="{:.3}"/>"#,
            style.edge_color, style.edge_width
        );
    }
    for path in paths {
        let points: Vec<String> = path
            .waypoints
            .iter()
            .map(|&p| {
                let (x, y) = frame.apply(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{:.3}"/>"#,
            points.join(" "),
            style.path_color,
            style.path_width
        );
    }
    for (i, v) in map.vertices().iter().enumerate() {
        let kind = PointKind::from_total_angle(total_angle(map, VertexIdx(i)), style.eps_kind);
        let (cx, cy) = frame.apply(v.position);
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="{}"/>"#,
            style.vertex_radius,
            style.color(kind)
        );
    }
    if style.labels {
        for (i, v) in map.vertices().iter().enumerate() {
            let total = total_angle(map, VertexIdx(i));
            let (x, y) = frame.apply(v.position);
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="sans-serif">{}</text>"#,
                x + style.vertex_radius + 2.0,
                y - style.vertex_radius - 2.0,
                sig4(total)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
