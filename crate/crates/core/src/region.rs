//! Closed-form achievable rates (bits per dimension) for recovering
//! `T₁`/`T₂` over the symmetric Gaussian MAC, the compute-and-forward
//! baseline, the cut-set style outer bound, and time-sharing hulls.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "T1-region")]
    T1Region,
    #[serde(rename = "T2-region")]
    T2Region,
    #[serde(rename = "point-A")]
    PointA,
    #[serde(rename = "point-B")]
    PointB,
    #[serde(rename = "CF-baseline")]
    CfBaseline,
    #[serde(rename = "outer-bound")]
    OuterBound,
    #[serde(rename = "hull")]
    Hull,
    /// Hull of the proposed region unioned with the CF square.
    #[serde(rename = "hull-cf")]
    HullCf,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::T1Region => "T1-region",
            Scheme::T2Region => "T2-region",
            Scheme::PointA => "point-A",
            Scheme::PointB => "point-B",
            Scheme::CfBaseline => "CF-baseline",
            Scheme::OuterBound => "outer-bound",
            Scheme::Hull => "hull",
            Scheme::HullCf => "hull-cf",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegionPoint {
    pub scheme: Scheme,
    /// Scaling coefficient that produced the point; `None` for bounds and
    /// hull vertices.
    pub alpha: Option<f64>,
    pub r1: f64,
    pub r2: f64,
    /// Set when a negative closed-form rate was raised to zero.
    pub clamped: bool,
}

pub const REGION_CSV_HEADER: &str = "scheme,alpha,r1,r2,clamped";

impl RateRegionPoint {
    fn new(scheme: Scheme, alpha: Option<f64>, r1: f64, r2: f64) -> Self {
        let clamped = r1 < 0.0 || r2 < 0.0;
        Self {
            scheme,
            alpha,
            r1: r1.max(0.0),
            r2: r2.max(0.0),
            clamped,
        }
    }

    pub fn swap(self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
            ..self
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.scheme,
            self.alpha.map(sig9).unwrap_or_default(),
            sig9(self.r1),
            sig9(self.r2),
            u8::from(self.clamped)
        )
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("snr must be positive, got {snr}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Unclamped `(R₁(α), R₂(α))`; `R₂` is `−∞` at α = 0.
pub fn r1_region_raw(alpha: f64, snr: f64) -> (f64, f64) {
    let denom = (alpha - 1.0).powi(2) * snr + alpha * alpha;
    let r1 = 0.5 * (snr / denom).log2();
    let r2 = 0.5 * (alpha * alpha * snr / denom).log2();
    (r1, r2)
}

/// Rate pair achievable while recovering `T₁` with coefficient α₁.
pub fn r1_region(alpha1: f64, snr: f64) -> Result<RateRegionPoint> {
    check_alpha(alpha1)?;
    check_snr(snr)?;
    let (r1, r2) = r1_region_raw(alpha1, snr);
    Ok(RateRegionPoint::new(Scheme::T1Region, Some(alpha1), r1, r2))
}

/// Mirror of [`r1_region`]: recovering `T₂` with coefficient α₂.
pub fn r2_region(alpha2: f64, snr: f64) -> Result<RateRegionPoint> {
    let p = r1_region(alpha2, snr)?.swap();
    Ok(RateRegionPoint {
        scheme: Scheme::T2Region,
        ..p
    })
}

pub fn alpha_mmse(snr: f64) -> f64 {
    snr / (1.0 + snr)
}

/// Per-user bound `½log₂(1 + snr)`.
pub fn outer_bound(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Compute-and-forward rate `½log₂(½ + snr)`; negative below snr = ½.
pub fn cf_rate(snr: f64) -> f64 {
    0.5 * (0.5 + snr).log2()
}

/// The tangency points `A = (½log₂(1+snr), ½log₂(snr²/(1+snr)))` and its
/// mirror `B`, both attained at α = α_MMSE.
pub fn points_ab(snr: f64) -> Result<(RateRegionPoint, RateRegionPoint)> {
    check_snr(snr)?;
    let a = RateRegionPoint::new(
        Scheme::PointA,
        Some(alpha_mmse(snr)),
        outer_bound(snr),
        0.5 * (snr * snr / (1.0 + snr)).log2(),
    );
    let b = RateRegionPoint {
        scheme: Scheme::PointB,
        ..a.swap()
    };
    Ok((a, b))
}

/// `{i/m : 1 ≤ i ≤ m} ∪ {α_MMSE}` sorted ascending; `m = 1` gives only α_MMSE.
pub fn alpha_grid(m: usize, snr: f64) -> Result<Vec<f64>> {
    check_snr(snr)?;
    if m == 0 {
        return Err(Error::InvalidParameter("alpha grid needs at least one point".into()));
    }
    let mut grid = vec![alpha_mmse(snr)];
    if m > 1 {
        grid.extend((1..=m).map(|i| i as f64 / m as f64));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Keeps points not dominated by another point; sorted by increasing `r1`.
/// Of several identical rate pairs the first one survives.
pub fn pareto_filter(points: &[RateRegionPoint]) -> Vec<RateRegionPoint> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        b.r1.total_cmp(&a.r1)
            .then(b.r2.total_cmp(&a.r2))
            .then(i.cmp(&j))
    });
    let mut best_r2 = f64::NEG_INFINITY;
    let mut front = Vec::new();
    for i in idx {
        if points[i].r2 > best_r2 {
            best_r2 = points[i].r2;
            front.push(points[i]);
        }
    }
    front.reverse();
    front
}

fn sweep(snr: f64, grid: &[f64]) -> Result<Vec<RateRegionPoint>> {
    let mut pts = Vec::with_capacity(2 * grid.len());
    for &a in grid {
        pts.push(r1_region(a, snr)?);
    }
    for &a in grid {
        pts.push(r2_region(a, snr)?);
    }
    Ok(pts)
}

/// Pareto front of `R₁(α)` and `R₂(α)` swept over `grid`.
pub fn region_boundary(snr: f64, grid: &[f64]) -> Result<Vec<RateRegionPoint>> {
    Ok(pareto_filter(&sweep(snr, grid)?))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper-right convex hull of `points` together with their projections on
/// both axes and the origin. Vertices run from `(0, max r2)` to
/// `(max r1, 0)` in increasing `r1`; collinear points are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.is_empty() {
        return Err(Error::Empty("convex hull of no points"));
    }
    let mut all = vec![(0.0, 0.0)];
    for &(x, y) in points {
        all.extend([(x, y), (x, 0.0), (0.0, y)]);
    }
    // x ascending, y descending: the chain starts at the top of the r2 axis
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    all.dedup();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in all {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(hull)
}

/// Largest `t` with `(t, t)` on the hull boundary.
pub fn symmetric_rate(hull: &[(f64, f64)]) -> f64 {
    let mut best: f64 = 0.0;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (a.0 - a.1, b.0 - b.1);
        if da == 0.0 {
            best = best.max(a.0);
        }
        if (da <= 0.0 && db >= 0.0) || (da >= 0.0 && db <= 0.0) {
            if da != db {
                let t = da / (da - db);
                best = best.max(a.0 + t * (b.0 - a.0));
            }
        }
    }
    if let Some(&(x, y)) = hull.last() {
        if x == y {
            best = best.max(x);
        }
    }
    best
}

fn hull_points(scheme: Scheme, pts: &[(f64, f64)]) -> Result<Vec<RateRegionPoint>> {
    Ok(convex_hull(pts)?
        .into_iter()
        .map(|(r1, r2)| RateRegionPoint::new(scheme, None, r1, r2))
        .collect())
}

/// Closure of the convex hull of `∪R₁(α₁) ∪ ∪R₂(α₂)` over `grid`; with
/// `include_cf` the CF square is added before taking the hull.
pub fn gtwrc_region(snr: f64, grid: &[f64], include_cf: bool) -> Result<Vec<RateRegionPoint>> {
    let mut pts: Vec<(f64, f64)> = sweep(snr, grid)?.iter().map(|p| (p.r1, p.r2)).collect();
    let scheme = if include_cf {
        let c = cf_rate(snr).max(0.0);
        pts.push((c, c));
        Scheme::HullCf
    } else {
        Scheme::Hull
    };
    hull_points(scheme, &pts)
}

/// Corners `(R,0), (R,R), (0,R)` of a per-user square.
fn square(scheme: Scheme, r: f64) -> Vec<RateRegionPoint> {
    vec![
        RateRegionPoint::new(scheme, None, r, 0.0),
        RateRegionPoint::new(scheme, None, r, r),
        RateRegionPoint::new(scheme, None, 0.0, r),
    ]
}

/// Scalar facts about one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub snr: f64,
    pub alpha_mmse: f64,
    pub point_a: RateRegionPoint,
    pub point_b: RateRegionPoint,
    pub outer_bound: f64,
    pub cf_rate: f64,
    pub hull_symmetric_rate: f64,
    pub hull_cf_symmetric_rate: f64,
    pub grid_size: usize,
}

/// Every series needed to plot the region at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub summary: RegionSummary,
    pub boundary: Vec<RateRegionPoint>,
    pub cf_square: Vec<RateRegionPoint>,
    pub outer_square: Vec<RateRegionPoint>,
    pub hull: Vec<RateRegionPoint>,
    pub hull_cf: Vec<RateRegionPoint>,
}

impl RegionReport {
    pub fn compute(snr: f64, grid: &[f64]) -> Result<Self> {
        check_snr(snr)?;
        if grid.is_empty() {
            return Err(Error::Empty("alpha grid"));
        }
        let (a, b) = points_ab(snr)?;
        let hull = gtwrc_region(snr, grid, false)?;
        let hull_cf = gtwrc_region(snr, grid, true)?;
        let sym = |h: &[RateRegionPoint]| {
            symmetric_rate(&h.iter().map(|p| (p.r1, p.r2)).collect::<Vec<_>>())
        };
        Ok(Self {
            summary: RegionSummary {
                snr,
                alpha_mmse: alpha_mmse(snr),
                point_a: a,
                point_b: b,
                outer_bound: outer_bound(snr),
                cf_rate: cf_rate(snr),
                hull_symmetric_rate: sym(&hull),
                hull_cf_symmetric_rate: sym(&hull_cf),
                grid_size: grid.len(),
            },
            boundary: region_boundary(snr, grid)?,
            cf_square: square(Scheme::CfBaseline, cf_rate(snr).max(0.0)),
            outer_square: square(Scheme::OuterBound, outer_bound(snr)),
            hull,
            hull_cf,
        })
    }

    /// All rows in output order: boundary, A, B, CF square, outer square,
    /// hull, CF hull.
    pub fn rows(&self, include_cf: bool, include_outer: bool) -> Vec<RateRegionPoint> {
        let mut rows = self.boundary.clone();
        rows.push(self.summary.point_a);
        rows.push(self.summary.point_b);
        if include_cf {
            rows.extend(&self.cf_square);
        }
        if include_outer {
            rows.extend(&self.outer_square);
        }
        rows.extend(&self.hull);
        if include_cf {
            rows.extend(&self.hull_cf);
        }
        rows
    }
}

/// Orders points by `r1` then `r2`; used by callers comparing fronts.
pub fn cmp_rates(a: &RateRegionPoint, b: &RateRegionPoint) -> Ordering {
    a.r1.total_cmp(&b.r1).then(a.r2.total_cmp(&b.r2))
}
