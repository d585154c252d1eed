//! Planar map geometries with per-vertex angle factors.
//!
//! A map is a planar straight-line graph whose vertices carry an angle
//! factor `μ`. A vertex of degree `ρ` has total angle `ρμ`; it is elliptic,
//! euclidean or hyperbolic as `ρμ` is below, equal to or above `2π`.
//! Lines crossing an edge bend by an amount given by a linear angle
//! function along the edge. This crate checks when families of parallel
//! lines stay parallel across cuts of edges, classifies maps by the cut
//! types they contain, traces ray families numerically and renders SVG.

pub mod angle;
pub mod bundle;
pub mod classify;
pub mod geom;
pub mod map;
pub mod svg;
pub mod trace;

pub use angle::{
    angle_at, edge_profile, point_kind, slope, AngleFunction, EdgeAngleProfile, PointKind,
};
pub use bundle::{
    cut_bundle_check, edge_bundle_check, exit_angle, parallels_initial, regular_specialization,
    stays_parallel, sufficient_per_edge, Cut, CutReport,
};
pub use classify::{
    class_generator, classify, extract_cuts, feasibility_chain, BundleClass, CutType, Orientation,
};
pub use geom::{BoundingBox, Vec2};
pub use map::{
    degree, parse_map, validate_map, Direction, MapBuilder, MapError, MapGeometry, OrientedEdge,
    Violation,
};
pub use trace::{
    bundle_oracle, cross_edge, trace_family, trace_ray, Ray, RayFamily, TraceOptions, TracePath,
};
