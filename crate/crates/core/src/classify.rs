//! Cut extraction along an orientation and the fifteen bundle classes.
//!
//! Bundles travel along the orientation vector `o`. Sweep lines are parallel
//! to `o` and are positioned by their offset along the transverse axis
//! `n = o` rotated by -90°, so sweeping by increasing offset moves from the
//! left (upper) side of the bundle to its right (lower) side. On each sweep
//! line the crossed edges form a cut, ordered by where they are met when
//! travelling along `o`; each edge is directed from its left endpoint to its
//! right endpoint (smaller to larger `n`-projection).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bundle::{cut_bundle_check, BundleError, Cut, CutReport};
use crate::geom::Vec2;
use crate::map::{Direction, MapBuilder, MapError, MapGeometry, OrientedEdge};

/// Default number of sweep lines used by [`classify`].
pub const DEFAULT_SWEEPS: usize = 64;
/// Default geometric tolerance, length units.
pub const DEFAULT_EPS_GEO: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("orientation must be a finite nonzero vector")]
    InvalidOrientation,
    #[error("sweep offsets must be strictly increasing")]
    UnorderedOffsets,
    #[error("sweep line at offset {offset} passes through vertex `{vertex}`")]
    DegenerateSweep { vertex: String, offset: f64 },
    #[error("no sweep line crosses any edge")]
    NoCut,
    #[error("sweep count must be at least 1")]
    ZeroSweeps,
    #[error("cut {index} is not a parallel bundle on its own")]
    NonBundleCut { index: usize },
    #[error("class code must be four binary digits other than 0000, got `{0}`")]
    InvalidCode(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Unit travel direction of a bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orientation(Vec2);

impl Orientation {
    pub fn new(dx: f64, dy: f64) -> Result<Self, ClassifyError> {
        Vec2::new(dx, dy)
            .normalized()
            .map(Orientation)
            .ok_or(ClassifyError::InvalidOrientation)
    }

    pub fn direction(&self) -> Vec2 {
        self.0
    }

    /// Axis along which sweep offsets are measured (right of travel).
    pub fn transverse(&self) -> Vec2 {
        self.0.perp_cw()
    }

    pub fn reversed(&self) -> Orientation {
        Orientation(-self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutType {
    EqualPi,
    LessPi,
    GreaterPi,
    Varying,
}

impl CutType {
    pub fn bit(self) -> u8 {
        match self {
            CutType::EqualPi => 0b1000,
            CutType::LessPi => 0b0100,
            CutType::GreaterPi => 0b0010,
            CutType::Varying => 0b0001,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CutType::EqualPi => "equal",
            CutType::LessPi => "less",
            CutType::GreaterPi => "greater",
            CutType::Varying => "varying",
        }
    }
}

/// Four-bit class code `wxyz`: equal, less, greater, varying.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BundleClass(u8);

impl BundleClass {
    pub fn new(bits: u8) -> Option<Self> {
        (1..=15).contains(&bits).then_some(BundleClass(bits))
    }

    pub fn all() -> impl Iterator<Item = BundleClass> {
        (1..=15).map(BundleClass)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, kind: CutType) -> bool {
        self.0 & kind.bit() != 0
    }

    /// `Cwxyz`.
    pub fn label(self) -> String {
        format!("C{:04b}", self.0)
    }
}

impl fmt::Display for BundleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for BundleClass {
    type Err = ClassifyError;

    /// Accepts `1011` or `C1011`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('C')
            .or_else(|| s.strip_prefix('c'))
            .unwrap_or(s);
        if digits.len() != 4 || !digits.chars().all(|c| c == '0' || c == '1') {
            return Err(ClassifyError::InvalidCode(s.to_string()));
        }
        u8::from_str_radix(digits, 2)
            .ok()
            .and_then(BundleClass::new)
            .ok_or_else(|| ClassifyError::InvalidCode(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCut {
    pub offset: f64,
    pub cut: Cut,
}

/// Cuts ordered by increasing sweep offset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutSequence {
    cuts: Vec<SweepCut>,
}

impl CutSequence {
    pub fn new(cuts: Vec<SweepCut>) -> Result<Self, ClassifyError> {
        if cuts.windows(2).any(|w| w[0].offset >= w[1].offset) {
            return Err(ClassifyError::UnorderedOffsets);
        }
        Ok(CutSequence { cuts })
    }

    pub fn cuts(&self) -> &[SweepCut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

/// Cuts met by sweep lines parallel to `o` at the given transverse offsets.
///
/// Sweep lines that cross no edge are skipped.
pub fn extract_cuts(
    map: &MapGeometry,
    o: Orientation,
    offsets: &[f64],
    eps_geo: f64,
) -> Result<CutSequence, ClassifyError> {
    if offsets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClassifyError::UnorderedOffsets);
    }
    let n = o.transverse();
    let along = o.direction();
    let proj: Vec<f64> = map.vertices().iter().map(|v| v.position.dot(n)).collect();
    let mut cuts = Vec::new();
    for &s in offsets {
        if let Some(i) = proj.iter().position(|&p| (p - s).abs() <= eps_geo) {
            return Err(ClassifyError::DegenerateSweep {
                vertex: map.vertices()[i].id.clone(),
                offset: s,
            });
        }
        let mut hits: Vec<(f64, OrientedEdge)> = Vec::new();
        for (i, e) in map.edges().iter().enumerate() {
            let (pu, pv) = (proj[e.u.0], proj[e.v.0]);
            if (pu - s) * (pv - s) >= 0.0 {
                continue;
            }
            let idx = crate::map::EdgeIdx(i);
            let oe = if pu < pv {
                OrientedEdge::forward(idx)
            } else {
                OrientedEdge::reverse(idx)
            };
            let (a, b) = map.segment(oe);
            let t = (s - a.dot(n)) / (b.dot(n) - a.dot(n));
            let hit = a + (b - a) * t;
            hits.push((hit.dot(along), oe));
        }
        if hits.is_empty() {
            continue;
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        let edges: Vec<OrientedEdge> = hits.into_iter().map(|(_, oe)| oe).collect();
        cuts.push(SweepCut {
            offset: s,
            cut: Cut::from_map(map, &edges)?,
        });
    }
    Ok(CutSequence { cuts })
}

/// Sweep offsets used by [`classify`].
///
/// The combinatorial cut only changes where a sweep line passes a vertex, so
/// one line per slab between consecutive vertex projections finds every cut.
/// When `sweep_count` is smaller than the number of slabs, `sweep_count`
/// evenly spaced lines are used instead, each moved off any vertex it hits.
pub fn sweep_offsets(
    map: &MapGeometry,
    o: Orientation,
    sweep_count: usize,
    eps_geo: f64,
) -> Vec<f64> {
    let n = o.transverse();
    let mut proj: Vec<f64> = map.vertices().iter().map(|v| v.position.dot(n)).collect();
    proj.sort_by(f64::total_cmp);
    proj.dedup_by(|a, b| (*a - *b).abs() <= eps_geo);
    if proj.len() < 2 || sweep_count == 0 {
        return Vec::new();
    }
    let mids: Vec<f64> = proj.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if sweep_count >= mids.len() {
        return mids;
    }
    let (lo, hi) = (proj[0], proj[proj.len() - 1]);
    let mut out: Vec<f64> = (0..sweep_count)
        .map(|j| {
            let s = lo + (j as f64 + 0.5) / sweep_count as f64 * (hi - lo);
            match proj.iter().position(|&p| (p - s).abs() <= eps_geo) {
                Some(k) if k < mids.len() => mids[k],
                Some(k) => mids[k - 1],
                None => s,
            }
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Type of a cut from its report: nonconstant `f(C, x)` is `Varying`,
/// otherwise the constant `f(C)` is compared with `|C|π`.
///
/// A cut whose slope sum is negative is also `Varying`; such a cut is never
/// a bundle, which callers read from `report.is_bundle`.
pub fn cut_type(report: &CutReport, eps: f64) -> CutType {
    match report.constant_value(eps) {
        None => CutType::Varying,
        Some(value) => {
            let target = report.len() as f64 * PI;
            if (value - target).abs() <= eps {
                CutType::EqualPi
            } else if value < target {
                CutType::LessPi
            } else {
                CutType::GreaterPi
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifiedCut {
    pub offset: f64,
    pub kind: CutType,
    /// `f(C)` when constant.
    pub value: Option<f64>,
    pub report: CutReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: BundleClass,
    pub sequence: CutSequence,
    pub cuts: Vec<ClassifiedCut>,
}

impl Classification {
    /// True when every cut is individually a bundle.
    pub fn all_bundles(&self) -> bool {
        self.cuts.iter().all(|c| c.report.is_bundle)
    }
}

/// Union of the cut types over a sequence, or `None` if it has no cuts.
pub fn class_of(seq: &CutSequence, eps: f64) -> Option<(BundleClass, Vec<ClassifiedCut>)> {
    let mut bits = 0u8;
    let mut typed = Vec::with_capacity(seq.len());
    for sc in seq.cuts() {
        let report = cut_bundle_check(&sc.cut, eps);
        let kind = cut_type(&report, eps);
        bits |= kind.bit();
        typed.push(ClassifiedCut {
            offset: sc.offset,
            kind,
            value: report.constant_value(eps),
            report,
        });
    }
    BundleClass::new(bits).map(|c| (c, typed))
}

pub fn classify(
    map: &MapGeometry,
    o: Orientation,
    sweep_count: usize,
    eps: f64,
    eps_geo: f64,
) -> Result<Classification, ClassifyError> {
    if sweep_count == 0 {
        return Err(ClassifyError::ZeroSweeps);
    }
    let offsets = sweep_offsets(map, o, sweep_count, eps_geo);
    let sequence = extract_cuts(map, o, &offsets, eps_geo)?;
    let (class, cuts) = class_of(&sequence, eps).ok_or(ClassifyError::NoCut)?;
    Ok(Classification {
        class,
        sequence,
        cuts,
    })
}

/// Outcome of the monotone-chain check across a cut sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub holds: bool,
    /// 1-based indices of the first adjacent pair breaking the chain.
    pub first_violation: Option<(usize, usize)>,
    /// Reduced exit angles `g_i = f(C_i, x) - (|C_i| - 1)π` at both ends of
    /// the shared domain.
    pub values: Vec<(f64, f64)>,
    pub domain: f64,
    /// Whether some cut below `π` is constant; `None` when no cut lies below.
    pub constant_below_pi: Option<bool>,
    /// Whether some cut above `π` is constant; `None` when no cut lies above.
    pub constant_above_pi: Option<bool>,
}

/// Checks that the reduced exit angles are pointwise nondecreasing from the
/// first cut to the last. Affine functions are compared at both ends of the
/// shared parameter domain.
pub fn feasibility_chain(seq: &CutSequence, eps: f64) -> Result<ChainReport, ClassifyError> {
    let reports: Vec<CutReport> = seq
        .cuts()
        .iter()
        .map(|c| cut_bundle_check(&c.cut, eps))
        .collect();
    if let Some(i) = reports.iter().position(|r| !r.is_bundle) {
        return Err(ClassifyError::NonBundleCut { index: i + 1 });
    }
    let domain = reports
        .iter()
        .map(|r| r.common_length)
        .fold(f64::INFINITY, f64::min);
    let domain = if domain.is_finite() { domain } else { 0.0 };
    let values: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| {
            let shift = (r.len() as f64 - 1.0) * PI;
            (r.value_at(0.0) - shift, r.value_at(domain) - shift)
        })
        .collect();
    let first_violation = values
        .windows(2)
        .position(|w| w[0].0 > w[1].0 + eps || w[0].1 > w[1].1 + eps)
        .map(|i| (i + 1, i + 2));

    let constant = |r: &CutReport| r.constant_value(eps).is_some();
    let mut below = None;
    let mut above = None;
    for (r, &(g0, g1)) in reports.iter().zip(&values) {
        if g0.max(g1) < PI - eps {
            below = Some(below.unwrap_or(false) || constant(r));
        } else if g0.min(g1) > PI + eps {
            above = Some(above.unwrap_or(false) || constant(r));
        }
    }
    Ok(ChainReport {
        holds: first_violation.is_none(),
        first_violation,
        values,
        domain,
        constant_below_pi: below,
        constant_above_pi: above,
    })
}

const LESS_VALUE: f64 = 0.45 * PI;
const EQUAL_VALUE: f64 = PI;
const GREATER_VALUE: f64 = 1.25 * PI;
const LOW_START: f64 = 0.3 * PI;
const PENDANT_MU: f64 = 0.5 * PI;

/// Builds a small map whose classification along `(1, 0)` is `target` and
/// whose cuts form a monotone chain.
///
/// Every cut is a single vertical unit edge. Constant cuts take the
/// half-angles `0.45π`, `π` and `1.25π`; a varying cut either bridges two
/// constant values or leads into the only one. Consecutive cuts share a
/// vertex when their values meet and otherwise jump to a new column joined
/// by a horizontal edge. Horizontal pendant edges raise vertex degrees where
/// a half-angle at or above `π` needs `ρ ≥ 3`.
pub fn class_generator(target: BundleClass) -> Result<(MapGeometry, Orientation), ClassifyError> {
    let bands = class_bands(target);
    let map = build_staircase(&bands)?;
    Ok((map, Orientation::new(1.0, 0.0)?))
}

fn class_bands(target: BundleClass) -> Vec<(f64, f64)> {
    let constants: Vec<f64> = [
        (CutType::LessPi, LESS_VALUE),
        (CutType::EqualPi, EQUAL_VALUE),
        (CutType::GreaterPi, GREATER_VALUE),
    ]
    .iter()
    .filter(|(k, _)| target.contains(*k))
    .map(|&(_, v)| v)
    .collect();
    let varying = target.contains(CutType::Varying);
    let mut bands = Vec::new();
    match (constants.as_slice(), varying) {
        ([], _) => bands.push((LOW_START, LESS_VALUE)),
        ([only], true) => {
            let start = if *only == LESS_VALUE {
                LOW_START
            } else {
                LESS_VALUE
            };
            bands.push((start, *only));
            bands.push((*only, *only));
        }
        ([first, second, rest @ ..], true) => {
            bands.push((*first, *first));
            bands.push((*first, *second));
            bands.push((*second, *second));
            bands.extend(rest.iter().map(|&c| (c, c)));
        }
        (all, false) => bands.extend(all.iter().map(|&c| (c, c))),
    }
    bands
}

struct Node {
    x: f64,
    y: f64,
    half_angle: f64,
    degree: usize,
    left_free: bool,
    right_free: bool,
}

fn build_staircase(bands: &[(f64, f64)]) -> Result<MapGeometry, MapError> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut verticals: Vec<(usize, usize)> = Vec::new();
    let mut connectors: Vec<(usize, usize)> = Vec::new();
    let mut column = 0.0;
    for (k, &(a, b)) in bands.iter().enumerate() {
        let top_y = -(k as f64);
        let top = match nodes.last() {
            Some(prev) if prev.half_angle == a => nodes.len() - 1,
            Some(_) => {
                column += 1.0;
                let prev = nodes.len() - 1;
                nodes[prev].right_free = false;
                nodes[prev].degree += 1;
                nodes.push(Node {
                    x: column,
                    y: top_y,
                    half_angle: a,
                    degree: 1,
                    left_free: false,
                    right_free: true,
                });
                connectors.push((prev, nodes.len() - 1));
                nodes.len() - 1
            }
            None => {
                nodes.push(Node {
                    x: column,
                    y: top_y,
                    half_angle: a,
                    degree: 0,
                    left_free: true,
                    right_free: true,
                });
                0
            }
        };
        nodes[top].degree += 1;
        nodes.push(Node {
            x: column,
            y: top_y - 1.0,
            half_angle: b,
            degree: 1,
            left_free: true,
            right_free: true,
        });
        verticals.push((top, nodes.len() - 1));
    }

    let mut builder = MapBuilder::new();
    let mut pendants = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let needed = (2.0 * node.half_angle / PI).floor() as usize + 1;
        let mut degree = node.degree;
        let mut sides = [(node.left_free, -0.4), (node.right_free, 0.4)].into_iter();
        while degree < needed {
            match sides.next() {
                Some((true, dx)) => {
                    pendants.push((i, node.x + dx, node.y));
                    degree += 1;
                }
                Some((false, _)) => {}
                None => break,
            }
        }
        builder.vertex(
            &format!("n{i}"),
            node.x,
            node.y,
            2.0 * node.half_angle / degree as f64,
        )?;
    }
    for (j, &(_, x, y)) in pendants.iter().enumerate() {
        builder.vertex(&format!("p{j}"), x, y, PENDANT_MU)?;
    }
    for (k, &(t, b)) in verticals.iter().enumerate() {
        builder.edge(&format!("s{k}"), &format!("n{t}"), &format!("n{b}"), None)?;
        builder.cut(
            &format!("band{k}"),
            &[(&format!("s{k}"), Direction::Forward)],
        )?;
    }
    for (j, &(a, b)) in connectors.iter().enumerate() {
        builder.edge(&format!("h{j}"), &format!("n{a}"), &format!("n{b}"), None)?;
    }
    for (j, &(i, _, _)) in pendants.iter().enumerate() {
        builder.edge(&format!("t{j}"), &format!("n{i}"), &format!("p{j}"), None)?;
    }
    builder.orientation(1.0, 0.0)?;
    Ok(builder.build())
}
