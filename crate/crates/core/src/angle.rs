//! Point kinds and the angle function along an oriented edge.
//!
//! A line crossing edge `uv` at distance `x` from `u` makes the angle
//! `f(x)`. At the endpoints the angle is half the total vertex angle,
//! `ρ(u)μ(u)/2` and `ρ(v)μ(v)/2`; in between it is interpolated linearly.

use std::f64::consts::PI;

use thiserror::Error;

use crate::map::{MapError, MapGeometry, OrientedEdge, VertexIdx};

/// Default tolerance for the elliptic / euclidean / hyperbolic split, radians.
pub const DEFAULT_EPS_KIND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointKind {
    Elliptic,
    Euclidean,
    Hyperbolic,
}

impl PointKind {
    /// Classifies a total vertex angle `ρμ` against `2π`.
    pub fn from_total_angle(total: f64, eps: f64) -> PointKind {
        let excess = total - 2.0 * PI;
        if excess.abs() <= eps {
            PointKind::Euclidean
        } else if excess < 0.0 {
            PointKind::Elliptic
        } else {
            PointKind::Hyperbolic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointKind::Elliptic => "elliptic",
            PointKind::Euclidean => "euclidean",
            PointKind::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngleError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("parameter {x} outside the edge domain [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },
    #[error("invalid profile: endpoint angles and length must be positive and finite")]
    InvalidProfile,
}

/// `ρ(u)μ(u)`, the total angle around a vertex.
pub fn total_angle(map: &MapGeometry, v: VertexIdx) -> f64 {
    map.degree_of(v) as f64 * map.vertex(v).angle_factor
}

pub fn point_kind(map: &MapGeometry, vertex: &str, eps: f64) -> Result<PointKind, AngleError> {
    let v = map
        .vertex_idx(vertex)
        .ok_or_else(|| MapError::UnknownVertex(vertex.to_string()))?;
    Ok(PointKind::from_total_angle(total_angle(map, v), eps))
}

/// Degree and angle factor of one endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexFactor {
    pub degree: usize,
    pub angle_factor: f64,
}

impl VertexFactor {
    pub fn half_angle(self) -> f64 {
        self.degree as f64 * self.angle_factor / 2.0
    }
}

/// An angle function along an edge of length `length()`, parameterised by
/// the distance from the near endpoint.
///
/// Implementations must satisfy `angle_at(0) == near()` and
/// `angle_at(length()) == far()`.
pub trait AngleFunction {
    fn near(&self) -> f64;
    fn far(&self) -> f64;
    fn length(&self) -> f64;
    fn angle_at(&self, x: f64) -> Result<f64, AngleError>;
    /// Right-hand derivative `df/dx|+` at `x`.
    fn right_derivative(&self, x: f64) -> Result<f64, AngleError>;
}

/// Linear angle function on an oriented edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeAngleProfile {
    near: f64,
    far: f64,
    length: f64,
    factors: Option<(VertexFactor, VertexFactor)>,
}

impl EdgeAngleProfile {
    /// Profile from raw endpoint angles `a` (near), `b` (far) and length `d`.
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self, AngleError> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(a) && ok(b) && ok(d)) {
            return Err(AngleError::InvalidProfile);
        }
        Ok(EdgeAngleProfile {
            near: a,
            far: b,
            length: d,
            factors: None,
        })
    }

    /// Profile from endpoint degrees and angle factors.
    pub fn from_factors(
        near: VertexFactor,
        far: VertexFactor,
        length: f64,
    ) -> Result<Self, AngleError> {
        let mut p = Self::new(near.half_angle(), far.half_angle(), length)?;
        p.factors = Some((near, far));
        Ok(p)
    }

    /// Endpoint factors when the profile was built from a map or from factors.
    pub fn factors(&self) -> Option<(VertexFactor, VertexFactor)> {
        self.factors
    }

    /// The same edge traversed in the other direction.
    pub fn reversed(&self) -> Self {
        EdgeAngleProfile {
            near: self.far,
            far: self.near,
            length: self.length,
            factors: self.factors.map(|(a, b)| (b, a)),
        }
    }
}

impl AngleFunction for EdgeAngleProfile {
    fn near(&self) -> f64 {
        self.near
    }

    fn far(&self) -> f64 {
        self.far
    }

    fn length(&self) -> f64 {
        self.length
    }

    fn angle_at(&self, x: f64) -> Result<f64, AngleError> {
        angle_at(self, x)
    }

    fn right_derivative(&self, x: f64) -> Result<f64, AngleError> {
        if !(0.0..=self.length).contains(&x) {
            return Err(AngleError::OutOfDomain {
                x,
                length: self.length,
            });
        }
        Ok(slope(self))
    }
}

pub fn edge_profile(map: &MapGeometry, oe: OrientedEdge) -> Result<EdgeAngleProfile, AngleError> {
    if oe.edge.0 >= map.edges().len() {
        return Err(MapError::UnknownEdge(format!("#{}", oe.edge.0)).into());
    }
    let (u, v) = map.endpoints(oe);
    let factor = |w: VertexIdx| VertexFactor {
        degree: map.degree_of(w),
        angle_factor: map.vertex(w).angle_factor,
    };
    EdgeAngleProfile::from_factors(factor(u), factor(v), map.edge_length(oe.edge))
}

/// `f(x) = (1 - x/d)·a + (x/d)·b` for `x` in `[0, d]`.
pub fn angle_at(profile: &EdgeAngleProfile, x: f64) -> Result<f64, AngleError> {
    let d = profile.length;
    if !(0.0..=d).contains(&x) {
        return Err(AngleError::OutOfDomain { x, length: d });
    }
    if x == d {
        return Ok(profile.far);
    }
    let t = x / d;
    Ok((1.0 - t) * profile.near + t * profile.far)
}

/// Constant derivative `(b - a)/d` of a linear profile.
pub fn slope(profile: &EdgeAngleProfile) -> f64 {
    (profile.far - profile.near) / profile.length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::parse_map;

    fn star_edge() -> MapGeometry {
        // u and v both have degree 5; the edge uv is 2 units long
        let mut s =
            String::from("vertex u 0 0 0.9424777960769379\nvertex v 2 0 1.5707963267948966\n");
        s.push_str("edge uv u v\n");
        for (i, (cx, cy)) in [(-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (-1.0, 1.0)]
            .iter()
            .enumerate()
        {
            s.push_str(&format!("vertex a{i} {cx} {cy} 1\nedge ea{i} u a{i}\n"));
            s.push_str(&format!(
                "vertex b{i} {} {cy} 1\nedge eb{i} v b{i}\n",
                4.0 - cx
            ));
        }
        parse_map(&s).unwrap()
    }

    #[test]
    fn kinds() {
        let eps = DEFAULT_EPS_KIND;
        assert_eq!(
            PointKind::from_total_angle(4.0 * (PI / 2.0), eps),
            PointKind::Euclidean
        );
        assert_eq!(
            PointKind::from_total_angle(5.0 * 0.3 * PI, eps),
            PointKind::Elliptic
        );
        assert_eq!(
            PointKind::from_total_angle(5.0 * 0.5 * PI, eps),
            PointKind::Hyperbolic
        );
        let m = star_edge();
        assert_eq!(point_kind(&m, "u", eps).unwrap(), PointKind::Elliptic);
        assert_eq!(point_kind(&m, "v", eps).unwrap(), PointKind::Hyperbolic);
        assert!(point_kind(&m, "nope", eps).is_err());
    }

    #[test]
    fn profile_from_map() {
        let m = star_edge();
        let e = m.edge_idx("uv").unwrap();
        let p = edge_profile(&m, OrientedEdge::forward(e)).unwrap();
        assert!((p.near() - 0.75 * PI).abs() < 1e-12);
        assert!((p.far() - 1.25 * PI).abs() < 1e-12);
        assert_eq!(p.length(), 2.0);
        let r = edge_profile(&m, OrientedEdge::reverse(e)).unwrap();
        assert!((r.near() - 1.25 * PI).abs() < 1e-12);
        assert!((r.far() - 0.75 * PI).abs() < 1e-12);
        assert_eq!(r, p.reversed());
    }

    #[test]
    fn evaluation() {
        let p = EdgeAngleProfile::new(0.75 * PI, 1.25 * PI, 2.0).unwrap();
        assert!((angle_at(&p, 1.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(angle_at(&p, 0.0).unwrap(), 0.75 * PI);
        assert_eq!(angle_at(&p, 2.0).unwrap(), 1.25 * PI);
        assert!((angle_at(&p, 0.5).unwrap() - 0.875 * PI).abs() < 1e-15);
        assert!(angle_at(&p, -0.1).is_err());
        assert!(angle_at(&p, 2.1).is_err());
        assert!((slope(&p) - 0.25 * PI).abs() < 1e-15);
        assert_eq!(slope(&p.reversed()), -slope(&p));
        let flat = EdgeAngleProfile::new(1.0, 1.0, 3.0).unwrap();
        assert_eq!(slope(&flat), 0.0);
        assert!(EdgeAngleProfile::new(0.0, 1.0, 1.0).is_err());
        assert!(EdgeAngleProfile::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn finite_difference_matches_slope() {
        let p = EdgeAngleProfile::new(0.75 * PI, 1.25 * PI, 2.0).unwrap();
        let h = 1e-6 * p.length();
        let x = 0.5;
        let fd = (angle_at(&p, x + h).unwrap() - angle_at(&p, x).unwrap()) / h;
        assert!((fd - slope(&p)).abs() <= 1e-6);
        assert_eq!(p.right_derivative(0.3).unwrap(), slope(&p));
    }
}
