//! Parallel-bundle conditions on single edges and on cuts.
//!
//! A family of parallel lines crossing the edges of a cut left to right
//! stays a bundle iff every prefix sum of the right derivatives of the edge
//! angle functions is nonnegative. Under the linear model the derivatives
//! are the constant slopes `(ρ(v)μ(v) - ρ(u)μ(u)) / (2 d(uv))`.
//!
//! All cut functions share one parameter: `x` is the distance from the near
//! endpoint, the same on every edge of the cut, so the common domain is
//! `[0, min d_i]`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::angle::{angle_at, edge_profile, slope, AngleError, AngleFunction, EdgeAngleProfile};
use crate::map::{MapGeometry, OrientedEdge};

/// Default verdict tolerance in slope / angle units.
pub const DEFAULT_EPS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("a cut needs at least one edge")]
    EmptyCut,
    #[error("edge index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("parameter {x} outside the common cut domain [0, {limit}]")]
    OutOfDomain { x: f64, limit: f64 },
    #[error("cut endpoints do not share one degree (found {0:?})")]
    NotRegular(Vec<usize>),
    #[error("profile of cut edge {0} carries no vertex factors")]
    MissingFactors(usize),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Ordered list of edge profiles crossed left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    profiles: Vec<EdgeAngleProfile>,
    edges: Vec<OrientedEdge>,
}

impl Cut {
    /// A cut that is not tied to any map.
    pub fn new(profiles: Vec<EdgeAngleProfile>) -> Result<Self, BundleError> {
        if profiles.is_empty() {
            return Err(BundleError::EmptyCut);
        }
        Ok(Cut {
            profiles,
            edges: Vec::new(),
        })
    }

    pub fn from_map(map: &MapGeometry, edges: &[OrientedEdge]) -> Result<Self, BundleError> {
        if edges.is_empty() {
            return Err(BundleError::EmptyCut);
        }
        let profiles = edges
            .iter()
            .map(|&oe| edge_profile(map, oe))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Cut {
            profiles,
            edges: edges.to_vec(),
        })
    }

    pub fn profiles(&self) -> &[EdgeAngleProfile] {
        &self.profiles
    }

    /// Map edges of the cut; empty for cuts built with [`Cut::new`].
    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Upper end of the shared parameter domain.
    pub fn common_length(&self) -> f64 {
        self.profiles
            .iter()
            .map(|p| p.length())
            .fold(f64::INFINITY, f64::min)
    }

    /// The cut traversed right to left with every edge reversed.
    pub fn reversed(&self) -> Cut {
        Cut {
            profiles: self.profiles.iter().rev().map(|p| p.reversed()).collect(),
            edges: self.edges.iter().rev().map(|e| e.flipped()).collect(),
        }
    }

    /// `f(C, x) = Σ f_i(x)`.
    pub fn value_at(&self, x: f64) -> Result<f64, BundleError> {
        self.check_domain(x)?;
        let mut sum = 0.0;
        for p in &self.profiles {
            sum += angle_at(p, x)?;
        }
        Ok(sum)
    }

    fn check_domain(&self, x: f64) -> Result<(), BundleError> {
        let limit = self.common_length();
        if !(0.0..=limit).contains(&x) {
            return Err(BundleError::OutOfDomain { x, limit });
        }
        Ok(())
    }
}

/// Slopes, prefix sums and verdicts for one cut.
#[derive(Clone, Debug, PartialEq)]
pub struct CutReport {
    pub slopes: Vec<f64>,
    pub prefix_sums: Vec<f64>,
    /// Σ f_i(0).
    pub value_at_zero: f64,
    pub common_length: f64,
    pub is_bundle: bool,
    pub stays_parallel: bool,
    pub parallels_initial: bool,
    /// 0-based index of the first negative prefix sum.
    pub first_violation: Option<usize>,
}

impl CutReport {
    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    /// `Σ f'_i`, the derivative of `f(C, x)`.
    pub fn slope_sum(&self) -> f64 {
        *self.prefix_sums.last().unwrap_or(&0.0)
    }

    pub fn min_prefix(&self) -> f64 {
        self.prefix_sums
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `f(C, x)` under the linear model.
    pub fn value_at(&self, x: f64) -> f64 {
        self.value_at_zero + x * self.slope_sum()
    }

    /// `f(C)` when `f(C, x)` does not depend on `x`, else `None`.
    pub fn constant_value(&self, eps: f64) -> Option<f64> {
        (self.slope_sum().abs() <= eps).then_some(self.value_at_zero)
    }
}

/// Single-edge condition: the angle function must not decrease.
pub fn edge_bundle_check(profile: &EdgeAngleProfile, eps: f64) -> bool {
    slope(profile) >= -eps
}

pub fn cut_bundle_check(cut: &Cut, eps: f64) -> CutReport {
    let slopes: Vec<f64> = cut.profiles.iter().map(slope).collect();
    let prefix_sums: Vec<f64> = slopes
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let first_violation = prefix_sums.iter().position(|&p| p < -eps);
    let value_at_zero: f64 = cut.profiles.iter().map(|p| p.near()).sum();
    let mut report = CutReport {
        slopes,
        prefix_sums,
        value_at_zero,
        common_length: cut.common_length(),
        is_bundle: first_violation.is_none(),
        stays_parallel: false,
        parallels_initial: false,
        first_violation,
    };
    report.stays_parallel = stays_parallel(&report, eps);
    report.parallels_initial = parallels_initial_from(&report, eps);
    report
}

/// Lines leave the cut parallel to each other: a bundle whose slope sum vanishes.
pub fn stays_parallel(report: &CutReport, eps: f64) -> bool {
    report.is_bundle && report.slope_sum().abs() <= eps
}

/// Lines leave the cut parallel to their initial direction:
/// `f(C, x) ≡ lπ` and the first `l - 1` prefix sums are nonnegative.
pub fn parallels_initial(cut: &Cut, eps: f64) -> bool {
    parallels_initial_from(&cut_bundle_check(cut, eps), eps)
}

fn parallels_initial_from(report: &CutReport, eps: f64) -> bool {
    let l = report.len();
    let head_ok = report.prefix_sums[..l - 1].iter().all(|&p| p >= -eps);
    head_ok
        && report.slope_sum().abs() <= eps
        && (report.value_at_zero - l as f64 * PI).abs() <= eps
}

/// Angle `α(i, x)` between a line that crossed the first `i` edges and its
/// initial direction, built by the recurrence
/// `α(1, x) = f_1(x)`, `α(i+1, x) = f_{i+1}(x) + α(i, x) - π`.
pub fn exit_angle(cut: &Cut, i: usize, x: f64) -> Result<f64, BundleError> {
    if i == 0 || i > cut.len() {
        return Err(BundleError::IndexOutOfRange {
            index: i,
            len: cut.len(),
        });
    }
    cut.check_domain(x)?;
    let mut alpha = angle_at(&cut.profiles[0], x)?;
    for p in &cut.profiles[1..i] {
        alpha = angle_at(p, x)? + alpha - PI;
    }
    Ok(alpha)
}

/// Every edge passes on its own; implies the cut is a bundle but not conversely.
pub fn sufficient_per_edge(cut: &Cut, eps: f64) -> bool {
    cut.profiles.iter().all(|p| edge_bundle_check(p, eps))
}

/// Bundle test for a cut whose endpoints all share one degree `ρ`.
///
/// With `ρ` factored out the system only involves angle factors: the prefix
/// sums of `(μ(v_i) - μ(u_i)) / d_i` must be nonnegative. The tolerance is
/// rescaled by `2/ρ` so the verdict matches [`cut_bundle_check`].
pub fn regular_specialization(cut: &Cut, eps: f64) -> Result<bool, BundleError> {
    let mut degrees = Vec::with_capacity(2 * cut.len());
    let mut terms = Vec::with_capacity(cut.len());
    for (i, p) in cut.profiles.iter().enumerate() {
        let (u, v) = p.factors().ok_or(BundleError::MissingFactors(i))?;
        degrees.push(u.degree);
        degrees.push(v.degree);
        terms.push((v.angle_factor - u.angle_factor) / p.length());
    }
    let rho = degrees[0];
    if degrees.iter().any(|&d| d != rho) {
        degrees.sort_unstable();
        degrees.dedup();
        return Err(BundleError::NotRegular(degrees));
    }
    let scaled_eps = eps * 2.0 / rho as f64;
    let mut acc = 0.0;
    for t in terms {
        acc += t;
        if acc < -scaled_eps {
            return Ok(false);
        }
    }
    Ok(true)
}
