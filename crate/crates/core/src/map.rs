//! Planar map geometries: vertices with angle factors, straight-line edges,
//! declared cuts and an optional default orientation.
//!
//! A [`MapGeometry`] is immutable once built. Construction (through
//! [`MapBuilder`] or [`parse_map`]) rejects malformed documents; the
//! structural requirements of a map geometry (planarity, connectivity, no
//! loops) are reported separately by [`validate_map`] so that tooling can
//! list every problem at once.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::geom::{on_segment, orient, segments_cross_properly, Vec2};

/// Index of a vertex inside its owning map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexIdx(pub usize);

/// Index of an edge inside its owning map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeIdx(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub position: Vec2,
    /// Angle factor in radians, strictly inside (0, pi).
    pub angle_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub u: VertexIdx,
    pub v: VertexIdx,
    pub length_override: Option<f64>,
}

/// Which way an edge is traversed: `Forward` runs from its `u` to its `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    fn symbol(self) -> char {
        match self {
            Direction::Forward => '+',
            Direction::Reverse => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub edge: EdgeIdx,
    pub direction: Direction,
}

impl OrientedEdge {
    pub fn forward(edge: EdgeIdx) -> Self {
        OrientedEdge {
            edge,
            direction: Direction::Forward,
        }
    }

    pub fn reverse(edge: EdgeIdx) -> Self {
        OrientedEdge {
            edge,
            direction: Direction::Reverse,
        }
    }

    pub fn flipped(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            direction: self.direction.flipped(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeclaredCut {
    pub id: String,
    pub edges: Vec<OrientedEdge>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<MapError>,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("vertex `{vertex}`: angle factor {mu} is outside the open interval (0, pi)")]
    AngleFactorOutOfRange { vertex: String, mu: f64 },
    #[error("vertex `{0}`: coordinates must be finite")]
    NonFiniteCoordinate(String),
    #[error("edge `{edge}`: length must be positive and finite, got {length}")]
    InvalidLength { edge: String, length: f64 },
    #[error("cut `{0}` has no edges")]
    EmptyCut(String),
    #[error("orientation must be a finite nonzero vector")]
    InvalidOrientation,
    #[error("orientation declared more than once")]
    DuplicateOrientation,
}

impl MapError {
    /// The underlying error with any line annotation stripped.
    pub fn root(&self) -> &MapError {
        match self {
            MapError::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            MapError::Syntax { line, .. } | MapError::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Immutable planar map geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct MapGeometry {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    cuts: Vec<DeclaredCut>,
    orientation: Option<Vec2>,
    vertex_index: HashMap<String, VertexIdx>,
    edge_index: HashMap<String, EdgeIdx>,
    degrees: Vec<usize>,
}

impl MapGeometry {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn declared_cuts(&self) -> &[DeclaredCut] {
        &self.cuts
    }

    pub fn default_orientation(&self) -> Option<Vec2> {
        self.orientation
    }

    pub fn vertex(&self, idx: VertexIdx) -> &Vertex {
        &self.vertices[idx.0]
    }

    pub fn edge(&self, idx: EdgeIdx) -> &Edge {
        &self.edges[idx.0]
    }

    pub fn vertex_idx(&self, id: &str) -> Option<VertexIdx> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_idx(&self, id: &str) -> Option<EdgeIdx> {
        self.edge_index.get(id).copied()
    }

    pub fn declared_cut(&self, id: &str) -> Option<&DeclaredCut> {
        self.cuts.iter().find(|c| c.id == id)
    }

    /// Number of edge-ends at `v`; a loop contributes two.
    pub fn degree_of(&self, v: VertexIdx) -> usize {
        self.degrees[v.0]
    }

    /// Edge length: the override when present, else the embedded distance.
    pub fn edge_length(&self, e: EdgeIdx) -> f64 {
        let edge = &self.edges[e.0];
        edge.length_override.unwrap_or_else(|| {
            self.vertices[edge.u.0]
                .position
                .distance(self.vertices[edge.v.0].position)
        })
    }

    /// `(near, far)` vertices of an oriented edge.
    pub fn endpoints(&self, oe: OrientedEdge) -> (VertexIdx, VertexIdx) {
        let e = &self.edges[oe.edge.0];
        match oe.direction {
            Direction::Forward => (e.u, e.v),
            Direction::Reverse => (e.v, e.u),
        }
    }

    /// `(near, far)` positions of an oriented edge.
    pub fn segment(&self, oe: OrientedEdge) -> (Vec2, Vec2) {
        let (a, b) = self.endpoints(oe);
        (self.vertices[a.0].position, self.vertices[b.0].position)
    }

    /// Renders `edge-id` plus its direction symbol, as used in cut lines.
    pub fn oriented_label(&self, oe: OrientedEdge) -> String {
        format!("{}{}", self.edges[oe.edge.0].id, oe.direction.symbol())
    }

    /// Canonical PMG text; `parse_map` of the result reproduces `self`.
    pub fn to_pmg(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!(
                "vertex {} {} {} {}\n",
                v.id,
                v.position.x + 0.0,
                v.position.y + 0.0,
                v.angle_factor
            ));
        }
        for e in &self.edges {
            let (u, v) = (&self.vertices[e.u.0].id, &self.vertices[e.v.0].id);
            match e.length_override {
                Some(len) => out.push_str(&format!("edge {} {} {} {}\n", e.id, u, v, len)),
                None => out.push_str(&format!("edge {} {} {}\n", e.id, u, v)),
            }
        }
        for c in &self.cuts {
            out.push_str("cut ");
            out.push_str(&c.id);
            for oe in &c.edges {
                out.push(' ');
                out.push_str(&self.oriented_label(*oe));
            }
            out.push('\n');
        }
        if let Some(o) = self.orientation {
            out.push_str(&format!("orientation {} {}\n", o.x, o.y));
        }
        out
    }
}

/// Incremental constructor for [`MapGeometry`].
#[derive(Default, Debug)]
pub struct MapBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    cuts: Vec<DeclaredCut>,
    orientation: Option<Vec2>,
    vertex_index: HashMap<String, VertexIdx>,
    edge_index: HashMap<String, EdgeIdx>,
}

impl MapBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: &str, x: f64, y: f64, mu: f64) -> Result<VertexIdx, MapError> {
        if self.vertex_index.contains_key(id) {
            return Err(MapError::DuplicateId {
                kind: "vertex",
                id: id.to_string(),
            });
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(MapError::NonFiniteCoordinate(id.to_string()));
        }
        if !(mu > 0.0 && mu < PI) {
            return Err(MapError::AngleFactorOutOfRange {
                vertex: id.to_string(),
                mu,
            });
        }
        let idx = VertexIdx(self.vertices.len());
        self.vertices.push(Vertex {
            id: id.to_string(),
            position: Vec2::new(x, y),
            angle_factor: mu,
        });
        self.vertex_index.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn edge(
        &mut self,
        id: &str,
        u: &str,
        v: &str,
        length: Option<f64>,
    ) -> Result<EdgeIdx, MapError> {
        if self.edge_index.contains_key(id) {
            return Err(MapError::DuplicateId {
                kind: "edge",
                id: id.to_string(),
            });
        }
        let ui = *self
            .vertex_index
            .get(u)
            .ok_or_else(|| MapError::UnknownVertex(u.to_string()))?;
        let vi = *self
            .vertex_index
            .get(v)
            .ok_or_else(|| MapError::UnknownVertex(v.to_string()))?;
        if let Some(len) = length {
            if !(len > 0.0 && len.is_finite()) {
                return Err(MapError::InvalidLength {
                    edge: id.to_string(),
                    length: len,
                });
            }
        }
        let idx = EdgeIdx(self.edges.len());
        self.edges.push(Edge {
            id: id.to_string(),
            u: ui,
            v: vi,
            length_override: length,
        });
        self.edge_index.insert(id.to_string(), idx);
        Ok(idx)
    }

    /// Declares a cut from `(edge-id, direction)` pairs, ordered left to right.
    pub fn cut(&mut self, id: &str, edges: &[(&str, Direction)]) -> Result<(), MapError> {
        if self.cuts.iter().any(|c| c.id == id) {
            return Err(MapError::DuplicateId {
                kind: "cut",
                id: id.to_string(),
            });
        }
        if edges.is_empty() {
            return Err(MapError::EmptyCut(id.to_string()));
        }
        let resolved = edges
            .iter()
            .map(|(e, dir)| {
                self.edge_index
                    .get(*e)
                    .map(|&edge| OrientedEdge {
                        edge,
                        direction: *dir,
                    })
                    .ok_or_else(|| MapError::UnknownEdge(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.cuts.push(DeclaredCut {
            id: id.to_string(),
            edges: resolved,
        });
        Ok(())
    }

    pub fn orientation(&mut self, dx: f64, dy: f64) -> Result<(), MapError> {
        if self.orientation.is_some() {
            return Err(MapError::DuplicateOrientation);
        }
        let o = Vec2::new(dx, dy);
        if !o.is_finite() || o.norm() == 0.0 {
            return Err(MapError::InvalidOrientation);
        }
        self.orientation = Some(o);
        Ok(())
    }

    pub fn build(self) -> MapGeometry {
        let mut degrees = vec![0; self.vertices.len()];
        for e in &self.edges {
            degrees[e.u.0] += 1;
            degrees[e.v.0] += 1;
        }
        MapGeometry {
            vertices: self.vertices,
            edges: self.edges,
            cuts: self.cuts,
            orientation: self.orientation,
            vertex_index: self.vertex_index,
            edge_index: self.edge_index,
            degrees,
        }
    }
}

fn parse_number(tok: &str, what: &str, line: usize) -> Result<f64, MapError> {
    let value: f64 = tok.parse().map_err(|_| MapError::Syntax {
        line,
        message: format!("expected a number for {what}, found `{tok}`"),
    })?;
    if !value.is_finite() {
        return Err(MapError::Syntax {
            line,
            message: format!("{what} must be finite, found `{tok}`"),
        });
    }
    Ok(value)
}

fn parse_oriented(tok: &str, line: usize) -> Result<(&str, Direction), MapError> {
    let dir = match tok.chars().last() {
        Some('+') => Direction::Forward,
        Some('-') => Direction::Reverse,
        _ => {
            return Err(MapError::Syntax {
                line,
                message: format!("cut member `{tok}` must end in `+` or `-`"),
            })
        }
    };
    let id = &tok[..tok.len() - 1];
    if id.is_empty() {
        return Err(MapError::Syntax {
            line,
            message: format!("cut member `{tok}` has no edge id"),
        });
    }
    Ok((id, dir))
}

/// Parses a PMG document.
///
/// ```text
/// vertex <id> <x> <y> <mu>
/// edge <id> <u-id> <v-id> [<length>]
/// cut <id> <edge-id><+|-> [<edge-id><+|-> ...]
/// orientation <dx> <dy>
/// ```
///
/// `#` starts a comment. Every error carries the 1-based line number.
pub fn parse_map(text: &str) -> Result<MapGeometry, MapError> {
    let mut b = MapBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, args)) = toks.split_first() else {
            continue;
        };
        let at = |e: MapError| MapError::AtLine {
            line,
            source: Box::new(e),
        };
        let arity = |want: &str| MapError::Syntax {
            line,
            message: format!(
                "`{keyword}` expects {want}, found {} argument(s)",
                args.len()
            ),
        };
        match keyword {
            "vertex" => {
                let [id, x, y, mu] = args else {
                    return Err(arity("<id> <x> <y> <mu>"));
                };
                let x = parse_number(x, "x", line)?;
                let y = parse_number(y, "y", line)?;
                let mu = parse_number(mu, "mu", line)?;
                b.vertex(id, x, y, mu).map_err(at)?;
            }
            "edge" => {
                let (id, u, v, len) = match args {
                    [id, u, v] => (id, u, v, None),
                    [id, u, v, len] => (id, u, v, Some(parse_number(len, "length", line)?)),
                    _ => return Err(arity("<id> <u-id> <v-id> [<length>]")),
                };
                b.edge(id, u, v, len).map_err(at)?;
            }
            "cut" => {
                let Some((id, members)) = args.split_first() else {
                    return Err(arity("<id> <edge-id><dir> ..."));
                };
                let members = members
                    .iter()
                    .map(|t| parse_oriented(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                b.cut(id, &members).map_err(at)?;
            }
            "orientation" => {
                let [dx, dy] = args else {
                    return Err(arity("<dx> <dy>"));
                };
                let dx = parse_number(dx, "dx", line)?;
                let dy = parse_number(dy, "dy", line)?;
                b.orientation(dx, dy).map_err(at)?;
            }
            other => {
                return Err(MapError::Syntax {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    Ok(b.build())
}

/// Looks up `ρ(u)` by vertex id.
pub fn degree(map: &MapGeometry, vertex: &str) -> Result<usize, MapError> {
    map.vertex_idx(vertex)
        .map(|v| map.degree_of(v))
        .ok_or_else(|| MapError::UnknownVertex(vertex.to_string()))
}

/// A broken structural requirement of a map geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    SelfLoop { edge: String },
    DegenerateLength { edge: String },
    CoincidentVertices { a: String, b: String },
    EdgesCross { a: String, b: String },
    EdgesOverlap { a: String, b: String },
    EdgeThroughVertex { edge: String, vertex: String },
    IsolatedVertex { vertex: String },
    Disconnected { components: usize },
}

impl Violation {
    /// Short machine-friendly rule name.
    pub fn rule(&self) -> &'static str {
        match self {
            Violation::SelfLoop { .. } => "self-loop",
            Violation::DegenerateLength { .. } => "degenerate-length",
            Violation::CoincidentVertices { .. } => "coincident-vertices",
            Violation::EdgesCross { .. } => "planarity",
            Violation::EdgesOverlap { .. } => "planarity",
            Violation::EdgeThroughVertex { .. } => "planarity",
            Violation::IsolatedVertex { .. } => "isolated-vertex",
            Violation::Disconnected { .. } => "connectivity",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.rule())?;
        match self {
            Violation::SelfLoop { edge } => write!(f, "edge `{edge}` is a loop"),
            Violation::DegenerateLength { edge } => write!(f, "edge `{edge}` has zero length"),
            Violation::CoincidentVertices { a, b } => {
                write!(f, "vertices `{a}` and `{b}` share a position")
            }
            Violation::EdgesCross { a, b } => write!(f, "edges `{a}` and `{b}` cross"),
            Violation::EdgesOverlap { a, b } => write!(f, "edges `{a}` and `{b}` overlap"),
            Violation::EdgeThroughVertex { edge, vertex } => {
                write!(f, "edge `{edge}` passes through vertex `{vertex}`")
            }
            Violation::IsolatedVertex { vertex } => write!(f, "vertex `{vertex}` has no edges"),
            Violation::Disconnected { components } => {
                write!(f, "graph has {components} connected components")
            }
        }
    }
}

/// Checks every structural requirement; an empty result means the map is a
/// valid planar map geometry.
pub fn validate_map(map: &MapGeometry) -> Vec<Violation> {
    let mut out = Vec::new();
    let verts = map.vertices();
    let edges = map.edges();

    for (i, e) in edges.iter().enumerate() {
        if e.u == e.v {
            out.push(Violation::SelfLoop { edge: e.id.clone() });
        } else if map.edge_length(EdgeIdx(i)) <= 0.0 {
            out.push(Violation::DegenerateLength { edge: e.id.clone() });
        }
    }

    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            if verts[i].position == verts[j].position {
                out.push(Violation::CoincidentVertices {
                    a: verts[i].id.clone(),
                    b: verts[j].id.clone(),
                });
            }
        }
    }

    for e in edges.iter().filter(|e| e.u != e.v) {
        let (p, q) = (verts[e.u.0].position, verts[e.v.0].position);
        if p == q {
            continue;
        }
        for (k, w) in verts.iter().enumerate() {
            if k == e.u.0 || k == e.v.0 || w.position == p || w.position == q {
                continue;
            }
            if on_segment(p, q, w.position) {
                out.push(Violation::EdgeThroughVertex {
                    edge: e.id.clone(),
                    vertex: w.id.clone(),
                });
            }
        }
    }

    for i in 0..edges.len() {
        let ei = &edges[i];
        if ei.u == ei.v {
            continue;
        }
        for ej in &edges[i + 1..] {
            if ej.u == ej.v {
                continue;
            }
            let (a, b) = (verts[ei.u.0].position, verts[ei.v.0].position);
            let (c, d) = (verts[ej.u.0].position, verts[ej.v.0].position);
            let shared: Vec<(Vec2, Vec2, Vec2)> = [
                (ei.u, a, b, ej.u, c, d),
                (ei.u, a, b, ej.v, d, c),
                (ei.v, b, a, ej.u, c, d),
                (ei.v, b, a, ej.v, d, c),
            ]
            .iter()
            .filter(|(x, _, _, y, _, _)| x == y)
            .map(|&(_, p, q1, _, _, q2)| (p, q1, q2))
            .collect();
            match shared.len() {
                0 => {
                    if segments_cross_properly(a, b, c, d) {
                        out.push(Violation::EdgesCross {
                            a: ei.id.clone(),
                            b: ej.id.clone(),
                        });
                    }
                }
                1 => {
                    let (p, q1, q2) = shared[0];
                    // two edges from one vertex overlap iff they leave in the same direction
                    if orient(p, q1, q2) == 0.0 && (q1 - p).dot(q2 - p) > 0.0 {
                        out.push(Violation::EdgesOverlap {
                            a: ei.id.clone(),
                            b: ej.id.clone(),
                        });
                    }
                }
                _ => out.push(Violation::EdgesOverlap {
                    a: ei.id.clone(),
                    b: ej.id.clone(),
                }),
            }
        }
    }

    for (i, v) in verts.iter().enumerate() {
        if map.degree_of(VertexIdx(i)) == 0 {
            out.push(Violation::IsolatedVertex {
                vertex: v.id.clone(),
            });
        }
    }

    let components = count_components(map);
    if components > 1 {
        out.push(Violation::Disconnected { components });
    }
    out
}

fn count_components(map: &MapGeometry) -> usize {
    let n = map.vertices().len();
    let mut adj = vec![Vec::new(); n];
    for e in map.edges() {
        adj[e.u.0].push(e.v.0);
        adj[e.v.0].push(e.u.0);
    }
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    components
}
