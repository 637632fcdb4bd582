//! Reference schemes: fixed-position antennas (FPA) and exhaustive antenna
//! selection (AS) from a half-wavelength candidate grid.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::framework::PlacementConstraints;
use crate::geometry::{AntennaLayout, Point2};

/// Baseline element spacing in wavelengths.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Row-major grid of `count` points at `HALF_WAVELENGTH` spacing anchored at
/// the origin, at most `max_cols` points wide.
fn anchored_grid(count: usize, max_cols: usize, constraints: &PlacementConstraints) -> Result<Vec<Point2>> {
    let fit = (constraints.region_side / HALF_WAVELENGTH + 1e-9).floor() as usize + 1;
    let cols = max_cols.min(fit).max(1);
    let rows = count.div_ceil(cols);
    if rows > fit {
        return Err(Error::RegionTooSmall(format!(
            "{count} antennas at spacing {HALF_WAVELENGTH} need more than a {}x{} region",
            constraints.region_side, constraints.region_side
        )));
    }
    Ok((0..count)
        .map(|i| Point2::new((i % cols) as f64 * HALF_WAVELENGTH, (i / cols) as f64 * HALF_WAVELENGTH))
        .collect())
}

/// Fixed layout: a `ceil(sqrt M)`-wide square grid at half-wavelength spacing
/// from the origin. `M = 4` gives the 2x2 square `{(0,0), (.5,0), (0,.5), (.5,.5)}`.
pub fn fpa_layout(m: usize, constraints: &PlacementConstraints) -> Result<AntennaLayout> {
    if m == 0 {
        return Err(Error::Precondition("need at least one antenna".into()));
    }
    let cols = (m as f64).sqrt().ceil() as usize;
    let grid = anchored_grid(m, cols, constraints)?;
    if (cols - 1) as f64 * HALF_WAVELENGTH > constraints.region_side + 1e-9 {
        return Err(Error::RegionTooSmall(format!(
            "{m} fixed antennas need a side of {}",
            (cols - 1) as f64 * HALF_WAVELENGTH
        )));
    }
    Ok(AntennaLayout::new(grid))
}

/// Candidate positions for antenna selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    positions: Vec<Point2>,
}

impl CandidateGrid {
    /// `count` candidates in rows of (up to) four at half-wavelength spacing
    /// from the origin: 8 candidates give the 2x4 grid whenever it fits, and
    /// narrower rows in smaller regions.
    pub fn new(count: usize, constraints: &PlacementConstraints) -> Result<Self> {
        if count == 0 {
            return Err(Error::Precondition("candidate grid must be non-empty".into()));
        }
        Ok(Self {
            positions: anchored_grid(count, 4, constraints)?,
        })
    }

    pub fn from_positions(positions: Vec<Point2>) -> Self {
        Self { positions }
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn subset_layout(&self, indices: &[usize]) -> AntennaLayout {
        indices.iter().map(|&i| self.positions[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Chosen candidate indices, ascending.
    pub indices: Vec<usize>,
    pub score: f64,
    pub evaluations: usize,
}

/// Exhaustive search over all `choose`-subsets, maximizing `evaluator`.
/// Subsets are visited in lexicographic order and only a strictly better score
/// replaces the incumbent, so ties go to the lexicographically smallest subset.
pub fn antenna_selection<F>(grid: &CandidateGrid, choose: usize, mut evaluator: F) -> Result<Selection>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if choose == 0 || choose > grid.len() {
        return Err(Error::Precondition(format!(
            "cannot choose {choose} of {} candidates",
            grid.len()
        )));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluations = 0;
    for subset in (0..grid.len()).combinations(choose) {
        let score = evaluator(&subset)?;
        evaluations += 1;
        if score.is_nan() {
            return Err(Error::NonFinite(format!("selection score for subset {subset:?}")));
        }
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((subset, score));
        }
    }
    let (indices, score) = best.expect("at least one subset");
    Ok(Selection {
        indices,
        score,
        evaluations,
    })
}
