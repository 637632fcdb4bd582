//! Planar geometry for the auxiliary-position block.
//!
//! The `z` block minimizes `sum_m ||z_m - r_m||^2` subject to
//! `||z_m - z_l|| >= D` for all pairs. It is solved by sweeping over `m` and
//! projecting `r_m` out of the union of the disks of radius `D` centered at
//! the other `z_l`. That single-point projection is solved exactly by
//! enumerating two candidate families on each violated circle:
//!
//! - intersections of the circle with every other circle, and
//! - the two points where the line through the center and `r_m` exits it.
//!
//! Candidates violating any disk are discarded and the nearest survivor wins.

use std::fmt;
use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold for tangency and coincidence classification.
pub const EPS_GEOM: f64 = 1e-10;
/// Slack allowed when checking `||p - c|| >= D`.
pub const EPS_FEAS: f64 = 1e-9;
/// Objective values closer than this are treated as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    fn lex_lt(self, other: Point2) -> bool {
        self.x < other.x || (self.x == other.x && self.y < other.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Ordered antenna positions. Index `m` is antenna `m`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AntennaLayout(Vec<Point2>);

impl AntennaLayout {
    pub fn new(points: Vec<Point2>) -> Self {
        Self(points)
    }

    pub fn into_inner(self) -> Vec<Point2> {
        self.0
    }

    /// Smallest distance over all pairs, `+inf` for fewer than two points.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.0.iter().enumerate() {
            for b in &self.0[i + 1..] {
                best = best.min(a.dist(*b));
            }
        }
        best
    }

    pub fn is_pairwise_feasible(&self, min_distance: f64, slack: f64) -> bool {
        self.min_pairwise_distance() >= min_distance - slack
    }

    /// `sum_m ||self_m - other_m||^2`.
    pub fn sq_distance_to(&self, other: &AntennaLayout) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.dist_sq(*b)).sum()
    }

    /// Flatten to `[x_0, y_0, x_1, y_1, ...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        debug_assert!(flat.len().is_multiple_of(2));
        Self(flat.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect())
    }
}

impl Deref for AntennaLayout {
    type Target = [Point2];
    fn deref(&self) -> &[Point2] {
        &self.0
    }
}

impl DerefMut for AntennaLayout {
    fn deref_mut(&mut self) -> &mut [Point2] {
        &mut self.0
    }
}

impl From<Vec<Point2>> for AntennaLayout {
    fn from(points: Vec<Point2>) -> Self {
        Self(points)
    }
}

impl FromIterator<Point2> for AntennaLayout {
    fn from_iter<I: IntoIterator<Item = Point2>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Equal-radius exclusion disks around fixed centers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSet {
    centers: Vec<Point2>,
    radius: f64,
}

impl DiskSet {
    pub fn new(centers: Vec<Point2>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Precondition(format!(
                "disk radius must be positive and finite, got {radius}"
            )));
        }
        if let Some(c) = centers.iter().find(|c| !c.is_finite()) {
            return Err(Error::Precondition(format!("non-finite disk center {c}")));
        }
        Ok(Self { centers, radius })
    }

    pub fn centers(&self) -> &[Point2] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// True when `p` is at least `radius - EPS_FEAS` away from every center.
    pub fn admits(&self, p: Point2) -> bool {
        let bound = self.radius - EPS_FEAS;
        self.centers.iter().all(|c| p.dist(*c) >= bound)
    }

    /// Indices of the disks that strictly contain `p` (beyond the slack).
    pub fn violated_by(&self, p: Point2) -> Vec<usize> {
        let bound = self.radius - EPS_FEAS;
        self.centers
            .iter()
            .enumerate()
            .filter(|(_, c)| p.dist(**c) < bound)
            .map(|(l, _)| l)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    /// Intersection of circle `circle` with circle `other`.
    CircleCircle { circle: usize, other: usize },
    /// Exit of the line through the center of `circle` and the query point.
    RayCircle { circle: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub point: Point2,
    pub source: CandidateSource,
}

/// Feasible candidate points for one projection query.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    pub points: Vec<Candidate>,
}

impl CandidateSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Nearest candidate to `target`; ties go to the lexicographically
    /// smallest `(x, y)`.
    pub fn nearest_to(&self, target: Point2) -> Option<Point2> {
        let best = self
            .points
            .iter()
            .map(|c| c.point.dist_sq(target))
            .fold(f64::INFINITY, f64::min);
        self.points
            .iter()
            .filter(|c| c.point.dist_sq(target) <= best + TIE_TOL)
            .map(|c| c.point)
            .reduce(|a, b| if b.lex_lt(a) { b } else { a })
    }
}

/// All real intersections of two circles.
///
/// Tangent circles (center distance within [`EPS_GEOM`] of `r1 + r2` or
/// `|r1 - r2|`) give exactly one point. Coincident circles are an error.
pub fn circle_circle_intersections(c1: Point2, r1: f64, c2: Point2, r2: f64) -> Result<Vec<Point2>> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::Precondition(format!(
            "circle radii must be positive, got {r1} and {r2}"
        )));
    }
    let delta = c2 - c1;
    let d = delta.norm();
    if d <= EPS_GEOM {
        if (r1 - r2).abs() <= EPS_GEOM {
            return Err(Error::InfiniteIntersections);
        }
        // concentric, distinct radii
        return Ok(Vec::new());
    }
    let outer = r1 + r2;
    let inner = (r1 - r2).abs();
    if d > outer + EPS_GEOM || d < inner - EPS_GEOM {
        return Ok(Vec::new());
    }
    let u = delta * (1.0 / d);
    // signed distance from c1 to the radical line along u
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    if (d - outer).abs() <= EPS_GEOM || (d - inner).abs() <= EPS_GEOM {
        return Ok(vec![c1 + u * a]);
    }
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let base = c1 + u * a;
    let off = u.perp() * h;
    Ok(vec![base + off, base - off])
}

/// The two points `center +/- radius * u` where `u` points from `center`
/// toward `through`.
pub fn ray_circle_exits(center: Point2, radius: f64, through: Point2) -> Result<[Point2; 2]> {
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    let v = through - center;
    let n = v.norm();
    if n <= EPS_GEOM {
        return Err(Error::DirectionUndefined);
    }
    let u = v * (1.0 / n);
    Ok([center + u * radius, center - u * radius])
}

/// Feasible candidates for projecting `r` out of `disks`.
///
/// Empty when `r` violates no disk (the answer is `r` itself) or when every
/// candidate is blocked by some other disk.
pub fn candidate_set(r: Point2, disks: &DiskSet) -> Result<CandidateSet> {
    let centers = disks.centers();
    let radius = disks.radius();
    let mut points = Vec::new();
    for l in disks.violated_by(r) {
        let exits = match ray_circle_exits(centers[l], radius, r) {
            Ok(pair) => pair,
            Err(Error::DirectionUndefined) => {
                let u = Point2::new(1.0, 0.0);
                [centers[l] + u * radius, centers[l] - u * radius]
            }
            Err(e) => return Err(e),
        };
        points.extend(exits.into_iter().map(|point| Candidate {
            point,
            source: CandidateSource::RayCircle { circle: l },
        }));
        for (j, &cj) in centers.iter().enumerate() {
            if j == l {
                continue;
            }
            let hits = match circle_circle_intersections(centers[l], radius, cj, radius) {
                Ok(hits) => hits,
                // duplicated center: its intersections are the circle itself,
                // already covered by the ray candidates
                Err(Error::InfiniteIntersections) => continue,
                Err(e) => return Err(e),
            };
            points.extend(hits.into_iter().map(|point| Candidate {
                point,
                source: CandidateSource::CircleCircle { circle: l, other: j },
            }));
        }
    }
    points.retain(|c| disks.admits(c.point));
    Ok(CandidateSet { points })
}

/// Nearest point to `r` lying outside every disk of `disks`.
pub fn project_outside_disks(r: Point2, disks: &DiskSet) -> Result<Point2> {
    if !r.is_finite() {
        return Err(Error::NonFinite(format!("query point {r}")));
    }
    if disks.admits(r) {
        return Ok(r);
    }
    candidate_set(r, disks)?
        .nearest_to(r)
        .ok_or(Error::InfeasibleProjection)
}

/// Outcome of [`solve_z_subproblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZSolution {
    pub z: AntennaLayout,
    /// `sum_m ||z_m - r_m||^2` at the start and after every sweep.
    pub objective_trace: Vec<f64>,
}

impl ZSolution {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&0.0)
    }

    pub fn sweeps(&self) -> usize {
        self.objective_trace.len().saturating_sub(1)
    }
}

/// Gauss-Seidel sweeps of exact single-point projections.
///
/// Each sweep updates `z_m` for `m = 0..M` in order against the current
/// positions of the others. Sweeps stop once the relative objective change is
/// at most `tol` or after `max_sweeps`. If a projection has no feasible
/// candidate the previous `z_m` is kept.
pub fn solve_z_subproblem(
    r: &AntennaLayout,
    z_init: &AntennaLayout,
    min_distance: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<ZSolution> {
    if r.is_empty() {
        return Err(Error::Precondition("layout must hold at least one antenna".into()));
    }
    if r.len() != z_init.len() {
        return Err(Error::DimensionMismatch(format!(
            "r has {} antennas but z_init has {}",
            r.len(),
            z_init.len()
        )));
    }
    if !z_init.is_pairwise_feasible(min_distance, EPS_FEAS) {
        return Err(Error::Precondition(format!(
            "z_init violates the spacing constraint (min distance {} < {min_distance})",
            z_init.min_pairwise_distance()
        )));
    }

    let mut z = z_init.clone();
    let mut trace = vec![z.sq_distance_to(r)];
    for _ in 0..max_sweeps {
        for m in 0..r.len() {
            let others = z.iter().enumerate().filter(|(l, _)| *l != m).map(|(_, p)| *p).collect();
            let disks = DiskSet::new(others, min_distance)?;
            match project_outside_disks(r[m], &disks) {
                Ok(p) => {
                    // exact minimization cannot do worse than the incumbent,
                    // which is itself feasible; guard against rounding
                    if p.dist_sq(r[m]) <= z[m].dist_sq(r[m]) {
                        z[m] = p;
                    }
                }
                Err(Error::InfeasibleProjection) => {
                    log::debug!("z sweep: no feasible candidate for antenna {m}, keeping previous");
                }
                Err(e) => return Err(e),
            }
        }
        let prev = *trace.last().unwrap();
        let cur = z.sq_distance_to(r);
        trace.push(cur);
        if (prev - cur).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(ZSolution {
        z,
        objective_trace: trace,
    })
}
