//! Families of parallel rays bent at edge crossings, and a pairwise
//! intersection oracle for the resulting polylines.
//!
//! Crossing an edge at a point where the angle function takes the value
//! `f` turns the ray counterclockwise by `δ = π - f`. The ray keeps going
//! until it leaves the domain box or reaches the crossing limit.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::angle::{angle_at, edge_profile, AngleError, AngleFunction, EdgeAngleProfile};
use crate::geom::{segment_distance, BoundingBox, Vec2};
use crate::map::{EdgeIdx, MapGeometry, OrientedEdge};

pub const DEFAULT_MAX_CROSSINGS: usize = 10_000;
/// Number of perturbed retries before a family is declared degenerate.
pub const PERTURBATION_ATTEMPTS: usize = 8;
/// Perturbation step as a fraction of the family spacing.
pub const PERTURBATION_STEP: f64 = 1e-6;
/// Cross products of unit directions at or below this are treated as parallel.
const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("ray direction must be a finite nonzero vector")]
    InvalidDirection,
    #[error("ray family needs at least 2 rays and a positive finite spacing")]
    InvalidFamily,
    #[error("ray origin ({x}, {y}) lies outside the trace domain")]
    OriginOutsideDomain { x: f64, y: f64 },
    #[error("tangent crossing{}", edge.as_ref().map(|e| format!(" of edge `{e}`")).unwrap_or_default())]
    TangentCrossing { edge: Option<String> },
    #[error("ray passes within tolerance of vertex `{vertex}`")]
    VertexHit { vertex: String },
    #[error("ray family still degenerate after {attempts} perturbations")]
    DegenerateFamily { attempts: usize },
    #[error(transparent)]
    Angle(#[from] AngleError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    direction: Vec2,
}

impl Ray {
    pub fn new(origin: Vec2, direction: Vec2) -> Result<Self, TraceError> {
        if !origin.is_finite() {
            return Err(TraceError::InvalidDirection);
        }
        let direction = direction.normalized().ok_or(TraceError::InvalidDirection)?;
        Ok(Ray { origin, direction })
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }
}

/// `count` parallel rays; ray `k` starts `k * spacing` to the right of the
/// base ray (right relative to the travel direction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayFamily {
    count: usize,
    base: Ray,
    spacing: f64,
}

impl RayFamily {
    pub fn new(base: Ray, count: usize, spacing: f64) -> Result<Self, TraceError> {
        if count < 2 || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(TraceError::InvalidFamily);
        }
        Ok(RayFamily {
            count,
            base,
            spacing,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn base(&self) -> Ray {
        self.base
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Member `k` with the whole family shifted sideways by `shift`.
    pub fn member(&self, k: usize, shift: f64) -> Ray {
        let side = self.base.direction.perp_cw();
        Ray {
            origin: self.base.origin + side * (k as f64 * self.spacing + shift),
            direction: self.base.direction,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub max_crossings: usize,
    pub eps_geo: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            max_crossings: DEFAULT_MAX_CROSSINGS,
            eps_geo: 1e-9,
        }
    }
}

/// One edge crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingEvent {
    pub edge: EdgeIdx,
    /// Distance from the edge's first endpoint.
    pub x: f64,
    pub angle: f64,
    pub deflection: f64,
    /// Direction after the crossing.
    pub outgoing: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePath {
    pub waypoints: Vec<Vec2>,
    pub events: Vec<CrossingEvent>,
    pub initial_direction: Vec2,
    pub final_direction: Vec2,
    pub truncated: bool,
}

impl TracePath {
    /// `Σ (π - f)` over the crossings.
    pub fn total_deflection(&self) -> f64 {
        self.events.iter().map(|e| e.deflection).sum()
    }

    /// Signed angle from the initial to the final direction, in (-π, π].
    pub fn net_turn(&self) -> f64 {
        let (a, b) = (self.initial_direction, self.final_direction);
        a.cross(b).atan2(a.dot(b))
    }
}

/// Outgoing direction after crossing an edge with unit direction `edge_dir`
/// at parameter `x`.
pub fn cross_edge(
    incoming: Vec2,
    edge_dir: Vec2,
    profile: &EdgeAngleProfile,
    x: f64,
    eps_geo: f64,
) -> Result<Vec2, TraceError> {
    if incoming.cross(edge_dir).abs() <= eps_geo {
        return Err(TraceError::TangentCrossing { edge: None });
    }
    let f = angle_at(profile, x)?;
    let delta = PI - f;
    if delta == 0.0 {
        return Ok(incoming);
    }
    Ok(incoming.rotated(delta))
}

enum Hit {
    Cross { t: f64, s: f64, edge: usize },
    Tangent { t: f64, edge: usize },
}

impl Hit {
    fn t(&self) -> f64 {
        match *self {
            Hit::Cross { t, .. } | Hit::Tangent { t, .. } => t,
        }
    }
}

fn nearest_hit(
    map: &MapGeometry,
    p: Vec2,
    d: Vec2,
    t_max: f64,
    skip: Option<EdgeIdx>,
    eps_geo: f64,
) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (i, e) in map.edges().iter().enumerate() {
        if skip == Some(EdgeIdx(i)) {
            continue;
        }
        let a = map.vertex(e.u).position;
        let b = map.vertex(e.v).position;
        let seg = b - a;
        let len = seg.norm();
        if len == 0.0 {
            continue;
        }
        let ap = a - p;
        let denom = d.cross(seg);
        let hit = if (denom / len).abs() <= eps_geo {
            // nearly parallel: only a problem when the segment lies on the ray
            let bp = b - p;
            if ap.cross(d).abs() > eps_geo || bp.cross(d).abs() > eps_geo {
                continue;
            }
            let (ta, tb) = (ap.dot(d), bp.dot(d));
            if ta.max(tb) <= 0.0 {
                continue;
            }
            Hit::Tangent {
                t: ta.min(tb).max(0.0),
                edge: i,
            }
        } else {
            let t = ap.cross(seg) / denom;
            let s = ap.cross(d) / denom;
            let tol = eps_geo / len;
            if t <= 0.0 || s < -tol || s > 1.0 + tol {
                continue;
            }
            Hit::Cross { t, s, edge: i }
        };
        if hit.t() <= t_max && best.as_ref().is_none_or(|b| hit.t() < b.t()) {
            best = Some(hit);
        }
    }
    best
}

pub fn trace_ray(
    map: &MapGeometry,
    ray: Ray,
    domain: &BoundingBox,
    opts: &TraceOptions,
) -> Result<TracePath, TraceError> {
    if !domain.contains(ray.origin) {
        return Err(TraceError::OriginOutsideDomain {
            x: ray.origin.x,
            y: ray.origin.y,
        });
    }
    let mut p = ray.origin;
    let mut d = ray.direction;
    let mut waypoints = vec![p];
    let mut events = Vec::new();
    let mut last = None;
    let mut truncated = false;
    loop {
        let t_exit = domain.exit_parameter(p, d);
        let Some(hit) = nearest_hit(map, p, d, t_exit, last, opts.eps_geo) else {
            if t_exit > 0.0 {
                waypoints.push(p + d * t_exit);
            }
            break;
        };
        if events.len() >= opts.max_crossings {
            truncated = true;
            break;
        }
        let (t, s, i) = match hit {
            Hit::Tangent { edge, .. } => {
                return Err(TraceError::TangentCrossing {
                    edge: Some(map.edges()[edge].id.clone()),
                })
            }
            Hit::Cross { t, s, edge } => (t, s, edge),
        };
        let e = &map.edges()[i];
        let (a, b) = (map.vertex(e.u).position, map.vertex(e.v).position);
        let geo_len = a.distance(b);
        let s = s.clamp(0.0, 1.0);
        if s * geo_len <= opts.eps_geo {
            return Err(TraceError::VertexHit {
                vertex: map.vertex(e.u).id.clone(),
            });
        }
        if (1.0 - s) * geo_len <= opts.eps_geo {
            return Err(TraceError::VertexHit {
                vertex: map.vertex(e.v).id.clone(),
            });
        }
        let edge = EdgeIdx(i);
        let profile = edge_profile(map, OrientedEdge::forward(edge))?;
        let x = (s * profile.length()).min(profile.length());
        let edge_dir = (b - a) * (1.0 / geo_len);
        let outgoing =
            cross_edge(d, edge_dir, &profile, x, opts.eps_geo).map_err(|err| match err {
                TraceError::TangentCrossing { .. } => TraceError::TangentCrossing {
                    edge: Some(e.id.clone()),
                },
                other => other,
            })?;
        let angle = angle_at(&profile, x)?;
        p = p + d * t;
        waypoints.push(p);
        events.push(CrossingEvent {
            edge,
            x,
            angle,
            deflection: PI - angle,
            outgoing,
        });
        d = outgoing;
        last = Some(edge);
    }
    Ok(TracePath {
        waypoints,
        events,
        initial_direction: ray.direction,
        final_direction: d,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyTrace {
    pub paths: Vec<TracePath>,
    /// `(k, shift)` when the family had to be moved sideways by `shift`
    /// on attempt `k` to avoid a vertex or tangent crossing.
    pub perturbation: Option<(usize, f64)>,
}

pub fn trace_family(
    map: &MapGeometry,
    family: &RayFamily,
    domain: &BoundingBox,
    opts: &TraceOptions,
) -> Result<FamilyTrace, TraceError> {
    for k in 0..=PERTURBATION_ATTEMPTS {
        let shift = k as f64 * PERTURBATION_STEP * family.spacing;
        let traced: Result<Vec<TracePath>, TraceError> = (0..family.count)
            .map(|i| trace_ray(map, family.member(i, shift), domain, opts))
            .collect();
        match traced {
            Ok(paths) => {
                let perturbation = (k > 0).then_some((k, shift));
                return Ok(FamilyTrace {
                    paths,
                    perturbation,
                });
            }
            Err(TraceError::VertexHit { .. } | TraceError::TangentCrossing { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(TraceError::DegenerateFamily {
        attempts: PERTURBATION_ATTEMPTS,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    /// True when no two paths come within `eps` of each other.
    pub verdict: bool,
    /// First intersecting pair of paths.
    pub intersection: Option<(usize, usize)>,
    pub min_separation: f64,
    /// Some pair of paths would meet if their final segments were extended.
    pub converges_beyond: bool,
    /// First `(i, j, k)` where paths `i` and `j` crossed the same edges up
    /// to crossing `k` (1-based) and their continuations from there meet.
    pub stage_convergence: Option<(usize, usize, usize)>,
}

impl OracleReport {
    /// No intersection inside the domain, after it, or along any extended stage.
    pub fn strict_verdict(&self) -> bool {
        self.verdict && !self.converges_beyond && self.stage_convergence.is_none()
    }
}

fn rays_meet(p: Vec2, d: Vec2, q: Vec2, e: Vec2) -> bool {
    let c = d.cross(e);
    if c.abs() <= PARALLEL_EPS {
        return false;
    }
    let w = q - p;
    let s = w.cross(e) / c;
    let t = w.cross(d) / c;
    s > 0.0 && t > 0.0
}

fn polyline_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for sa in a.windows(2) {
        for sb in b.windows(2) {
            best = best.min(segment_distance(sa[0], sa[1], sb[0], sb[1]));
        }
    }
    if a.len() == 1 || b.len() == 1 {
        for &p in a.iter().take(1).chain(b.iter().take(1)) {
            let other = if a.len() == 1 { b } else { a };
            for w in other.windows(2) {
                best = best.min(crate::geom::point_segment_distance(p, w[0], w[1]));
            }
        }
    }
    best
}

/// Pairwise intersection test over traced paths, which all lie inside the
/// trace domain.
pub fn bundle_oracle(paths: &[TracePath], eps: f64) -> OracleReport {
    let mut intersection = None;
    let mut min_separation = f64::INFINITY;
    let mut converges_beyond = false;
    let mut stage_convergence = None;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let (a, b) = (&paths[i], &paths[j]);
            let sep = polyline_distance(&a.waypoints, &b.waypoints);
            min_separation = min_separation.min(sep);
            if sep < eps && intersection.is_none() {
                intersection = Some((i, j));
            }
            if let (Some(&pa), Some(&pb)) = (a.waypoints.last(), b.waypoints.last()) {
                converges_beyond |= rays_meet(pa, a.final_direction, pb, b.final_direction);
            }
            if stage_convergence.is_none() {
                let shared = a
                    .events
                    .iter()
                    .zip(&b.events)
                    .take_while(|(x, y)| x.edge == y.edge)
                    .count();
                stage_convergence = (1..=shared)
                    .find(|&k| {
                        let (ea, eb) = (&a.events[k - 1], &b.events[k - 1]);
                        rays_meet(a.waypoints[k], ea.outgoing, b.waypoints[k], eb.outgoing)
                    })
                    .map(|k| (i, j, k));
            }
        }
    }
    OracleReport {
        verdict: intersection.is_none(),
        intersection,
        min_separation,
        converges_beyond,
        stage_convergence,
    }
}

/// Text dump: `path <k> <x> <y>` per waypoint and
/// `event <k> <edge-id> <x-param> <f> <delta>` per crossing.
pub fn dump_paths(map: &MapGeometry, paths: &[TracePath]) -> String {
    let mut out = String::new();
    for (k, path) in paths.iter().enumerate() {
        for p in &path.waypoints {
            let _ = writeln!(out, "path {k} {} {}", p.x, p.y);
        }
        for e in &path.events {
            let id = &map.edges()[e.edge.0].id;
            let _ = writeln!(out, "event {k} {id} {} {} {}", e.x, e.angle, e.deflection);
        }
    }
    out
}
