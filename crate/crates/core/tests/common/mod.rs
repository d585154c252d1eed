#![allow(dead_code)]

use std::f64::consts::PI;

use parbundle::classify::Orientation;
use parbundle::geom::{BoundingBox, Vec2};
use parbundle::map::{Direction, MapBuilder, MapGeometry, OrientedEdge};
use parbundle::trace::{trace_family, FamilyTrace, Ray, RayFamily, TraceOptions};
use parbundle::{Cut, EdgeAngleProfile};
use rand::Rng;

/// Horizontal gap between neighbouring rungs of a ladder. Small enough that
/// every ray meets all rungs at practically the same depth.
pub const RUNG_PITCH: f64 = 1e-8;
/// Degree of every rung endpoint in a ladder.
pub const RUNG_DEGREE: usize = 3;

/// One rung: half-angle at the top, at the bottom, and its length.
#[derive(Clone, Copy, Debug)]
pub struct Rung {
    pub top: f64,
    pub bottom: f64,
    pub length: f64,
}

impl Rung {
    pub fn slope(&self) -> f64 {
        (self.bottom - self.top) / self.length
    }
}

/// Vertical rungs hanging from `y = 0` at `x = i * RUNG_PITCH`, joined by a
/// top and a bottom rail, with a horizontal leaf at each rail end so every
/// rung endpoint has degree 3. Travel is `+x`; rung edges run top to bottom.
pub struct Ladder {
    pub map: MapGeometry,
    pub rungs: Vec<Rung>,
}

impl Ladder {
    pub fn new(rungs: &[Rung]) -> Ladder {
        let mut b = MapBuilder::new();
        let l = rungs.len();
        let rho = RUNG_DEGREE as f64;
        for (i, r) in rungs.iter().enumerate() {
            let x = i as f64 * RUNG_PITCH;
            b.vertex(&format!("u{i}"), x, 0.0, 2.0 * r.top / rho)
                .unwrap();
            b.vertex(&format!("v{i}"), x, -r.length, 2.0 * r.bottom / rho)
                .unwrap();
        }
        let last_x = (l - 1) as f64 * RUNG_PITCH;
        let last_len = rungs[l - 1].length;
        b.vertex("lt", -1.0, 0.0, PI / 2.0).unwrap();
        b.vertex("lb", -1.0, -rungs[0].length, PI / 2.0).unwrap();
        b.vertex("rt", last_x + 1.0, 0.0, PI / 2.0).unwrap();
        b.vertex("rb", last_x + 1.0, -last_len, PI / 2.0).unwrap();
        for i in 0..l {
            b.edge(&format!("r{i}"), &format!("u{i}"), &format!("v{i}"), None)
                .unwrap();
        }
        for i in 0..l.saturating_sub(1) {
            b.edge(
                &format!("t{i}"),
                &format!("u{i}"),
                &format!("u{}", i + 1),
                None,
            )
            .unwrap();
            b.edge(
                &format!("b{i}"),
                &format!("v{i}"),
                &format!("v{}", i + 1),
                None,
            )
            .unwrap();
        }
        b.edge("elt", "lt", "u0", None).unwrap();
        b.edge("elb", "lb", "v0", None).unwrap();
        b.edge("ert", &format!("u{}", l - 1), "rt", None).unwrap();
        b.edge("erb", &format!("v{}", l - 1), "rb", None).unwrap();
        let ids: Vec<String> = (0..l).map(|i| format!("r{i}")).collect();
        let spec: Vec<(&str, Direction)> = ids
            .iter()
            .map(|s| (s.as_str(), Direction::Forward))
            .collect();
        b.cut("rungs", &spec).unwrap();
        b.orientation(1.0, 0.0).unwrap();
        Ladder {
            map: b.build(),
            rungs: rungs.to_vec(),
        }
    }

    pub fn cut(&self) -> Cut {
        let edges: Vec<OrientedEdge> = (0..self.rungs.len())
            .map(|i| OrientedEdge::forward(self.map.edge_idx(&format!("r{i}")).unwrap()))
            .collect();
        Cut::from_map(&self.map, &edges).unwrap()
    }

    pub fn orientation(&self) -> Orientation {
        Orientation::new(1.0, 0.0).unwrap()
    }

    pub fn domain(&self) -> BoundingBox {
        let last_x = (self.rungs.len() - 1) as f64 * RUNG_PITCH;
        BoundingBox::new(Vec2::new(-0.5, -3.0), Vec2::new(last_x + 0.01, 1.0))
    }

    /// `count` rays `spacing` apart, centred at depth `depth` below the top rail.
    pub fn trace(&self, count: usize, spacing: f64, depth: f64) -> FamilyTrace {
        let top = -depth + 0.5 * (count as f64 - 1.0) * spacing;
        let base = Ray::new(Vec2::new(-0.4, top), Vec2::new(1.0, 0.0)).unwrap();
        let fam = RayFamily::new(base, count, spacing).unwrap();
        trace_family(&self.map, &fam, &self.domain(), &TraceOptions::default()).unwrap()
    }
}

pub fn random_half_angle<R: Rng>(rng: &mut R) -> f64 {
    PI + rng.gen_range(-0.2..0.2)
}

/// Independent random rungs; prefix sums take both signs.
pub fn random_rungs<R: Rng>(rng: &mut R, l: usize) -> Vec<Rung> {
    (0..l)
        .map(|_| Rung {
            top: random_half_angle(rng),
            bottom: random_half_angle(rng),
            length: rng.gen_range(1.0..2.0),
        })
        .collect()
}

/// Rungs with nonnegative slopes except the last, which cancels the sum.
pub fn balanced_rungs<R: Rng>(rng: &mut R, l: usize) -> Vec<Rung> {
    let mut rungs = Vec::with_capacity(l);
    let mut total = 0.0;
    for _ in 0..l - 1 {
        let top = random_half_angle(rng);
        let length = rng.gen_range(1.0..2.0);
        let s = rng.gen_range(0.0..0.1);
        total += s;
        rungs.push(Rung {
            top,
            bottom: top + s * length,
            length,
        });
    }
    let top = random_half_angle(rng);
    let length = rng.gen_range(1.0..2.0);
    rungs.push(Rung {
        top,
        bottom: top - total * length,
        length,
    });
    rungs
}

/// As [`balanced_rungs`], with the top half-angles summing to `lπ`.
pub fn identity_rungs<R: Rng>(rng: &mut R, l: usize) -> Vec<Rung> {
    let mut rungs = balanced_rungs(rng, l);
    let head: f64 = rungs[..l - 1].iter().map(|r| r.top).sum();
    let last = &mut rungs[l - 1];
    let s = last.slope();
    last.top = l as f64 * PI - head;
    last.bottom = last.top + s * last.length;
    rungs
}

/// Jittered `n × n` grid split into triangles along random diagonals. Corner
/// cells use the diagonal through the corner so every vertex has degree at
/// least 3, and every vertex gets `μ = 2π/ρ`.
pub fn euclidean_grid<R: Rng>(rng: &mut R, n: usize) -> MapGeometry {
    assert!(n >= 3);
    let id = |i: usize, j: usize| format!("g{i}_{j}");
    let mut pos = vec![vec![Vec2::default(); n]; n];
    for (i, row) in pos.iter_mut().enumerate() {
        for (j, p) in row.iter_mut().enumerate() {
            *p = Vec2::new(
                i as f64 + rng.gen_range(-0.15..0.15),
                j as f64 + rng.gen_range(-0.15..0.15),
            );
        }
    }
    let mut edges: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < n {
                edges.push(((i, j), (i, j + 1)));
            }
        }
    }
    let last = n - 2;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let main = match (i, j) {
                (0, 0) => true,
                (a, b) if a == last && b == last => true,
                (0, b) if b == last => false,
                (a, 0) if a == last => false,
                _ => rng.gen_bool(0.5),
            };
            if main {
                edges.push(((i, j), (i + 1, j + 1)));
            } else {
                edges.push(((i + 1, j), (i, j + 1)));
            }
        }
    }
    let mut degree = vec![vec![0usize; n]; n];
    for &((a, b), (c, d)) in &edges {
        degree[a][b] += 1;
        degree[c][d] += 1;
    }
    let mut builder = MapBuilder::new();
    for i in 0..n {
        for j in 0..n {
            let mu = 2.0 * PI / degree[i][j] as f64;
            builder
                .vertex(&id(i, j), pos[i][j].x, pos[i][j].y, mu)
                .unwrap();
        }
    }
    for (k, &((a, b), (c, d))) in edges.iter().enumerate() {
        builder
            .edge(&format!("e{k}"), &id(a, b), &id(c, d), None)
            .unwrap();
    }
    builder.build()
}

/// Random profile with endpoint degrees in 1..=8 and factors in (0.05π, 0.95π).
pub fn random_factor_profile<R: Rng>(rng: &mut R) -> EdgeAngleProfile {
    use parbundle::angle::VertexFactor;
    let mut factor = || VertexFactor {
        degree: rng.gen_range(1..=8),
        angle_factor: rng.gen_range(0.05 * PI..0.95 * PI),
    };
    let (u, v) = (factor(), factor());
    EdgeAngleProfile::from_factors(u, v, rng.gen_range(0.1..10.0)).unwrap()
}

/// Random profile with half-angles in (0.1π, 3π) and length in (0.1, 10).
pub fn random_profile<R: Rng>(rng: &mut R) -> EdgeAngleProfile {
    EdgeAngleProfile::new(
        rng.gen_range(0.1 * PI..3.0 * PI),
        rng.gen_range(0.1 * PI..3.0 * PI),
        rng.gen_range(0.1..10.0),
    )
    .unwrap()
}

pub fn random_cut<R: Rng>(rng: &mut R, max_len: usize) -> Cut {
    let l = rng.gen_range(1..=max_len);
    Cut::new((0..l).map(|_| random_profile(rng)).collect()).unwrap()
}

/// Profiles with `b >= a`, each passing the single-edge check.
pub fn random_monotone_cut<R: Rng>(rng: &mut R, max_len: usize) -> Cut {
    let l = rng.gen_range(1..=max_len);
    Cut::new(
        (0..l)
            .map(|_| {
                let a = rng.gen_range(0.1 * PI..2.0 * PI);
                let b = a + rng.gen_range(0.0..PI);
                EdgeAngleProfile::new(a, b, rng.gen_range(0.1..10.0)).unwrap()
            })
            .collect(),
    )
    .unwrap()
}
