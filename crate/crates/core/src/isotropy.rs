//! Measured almost isotropy: the isotropy function, its defect, bad
//! direction sets and almost unseen cap covers.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neck::{GluedManifold, GluedPoint};
use crate::numeric::fmt_num;
use crate::spaceform::{SpaceFormParams, SpaceFormPoint};
use crate::warped::{geodesic_endpoint, geodesic_shoot, warped_distance, WarpProfile, WarpedPoint};

/// Default number of sampled directions on the circle, spacing `pi / 720`.
pub const DIRECTION_COUNT: usize = 1440;

/// A region to avoid: a union of metric balls, or the whole neck of a glued
/// surface.
#[derive(Clone, Debug)]
pub enum Region<P> {
    Balls(Vec<(P, f64)>),
    Neck,
}

impl<P> Region<P> {
    pub fn empty() -> Self {
        Region::Balls(Vec::new())
    }
}

/// A surface with geodesic shooting from a base point.
pub trait IsotropicSurface: Sync {
    type Point: Clone + Send + Sync;

    /// Endpoint of the unit-speed geodesic from `p` leaving at angle
    /// `alpha`, after arclength `length`.
    fn shoot(&self, p: &Self::Point, alpha: f64, length: f64) -> Result<Self::Point>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// Whether `exp_p([0, length] v_alpha)` meets the region. Grazing
    /// geodesics count as meeting it.
    fn meets(&self, p: &Self::Point, alpha: f64, length: f64, region: &Region<Self::Point>) -> Result<bool>;
}

const GRAZE: f64 = 1e-9;

impl IsotropicSurface for SpaceFormParams {
    type Point = SpaceFormPoint;

    fn shoot(&self, p: &SpaceFormPoint, alpha: f64, length: f64) -> Result<SpaceFormPoint> {
        let v = self.direction(p, alpha)?;
        self.exp_map(p, &v, length)
    }

    fn distance(&self, a: &SpaceFormPoint, b: &SpaceFormPoint) -> Result<f64> {
        SpaceFormParams::distance(self, a, b)
    }

    fn meets(&self, p: &SpaceFormPoint, alpha: f64, length: f64, region: &Region<SpaceFormPoint>) -> Result<bool> {
        let Region::Balls(balls) = region else {
            return Err(Error::domain("a space form has no neck"));
        };
        if balls.is_empty() {
            return Ok(false);
        }
        // Long geodesics on the sphere are split so each piece is minimizing.
        let pieces = self.diameter().map_or(1, |d| (2.0 * length / d).ceil().max(1.0) as usize);
        let v = self.direction(p, alpha)?;
        let mut a = p.clone();
        for i in 1..=pieces {
            let b = self.exp_map(p, &v, length * i as f64 / pieces as f64)?;
            for (q, rho) in balls {
                if self.segment_clearance(q, &a, &b) <= rho * (1.0 + GRAZE) {
                    return Ok(true);
                }
            }
            a = b;
        }
        Ok(false)
    }
}

/// Geodesics of a surface of revolution, integrated numerically.
impl IsotropicSurface for WarpProfile {
    type Point = WarpedPoint;

    fn shoot(&self, p: &WarpedPoint, alpha: f64, length: f64) -> Result<WarpedPoint> {
        geodesic_endpoint(self, *p, alpha, length)
    }

    fn distance(&self, a: &WarpedPoint, b: &WarpedPoint) -> Result<f64> {
        warped_distance(self, *a, *b)
    }

    fn meets(&self, p: &WarpedPoint, alpha: f64, length: f64, region: &Region<WarpedPoint>) -> Result<bool> {
        let Region::Balls(balls) = region else {
            return Err(Error::domain("a warped product has no neck"));
        };
        if balls.is_empty() {
            return Ok(false);
        }
        let path = geodesic_shoot(self, *p, alpha, length)?;
        let mut prev_s = 0.0;
        for state in &path.samples {
            // Distance is 1-Lipschitz along the path, so the gap between
            // samples widens the test by half a step.
            let slack = 0.5 * (state.s - prev_s).max(0.0);
            prev_s = state.s;
            let x = WarpedPoint::new(state.t, state.phi);
            for (q, rho) in balls {
                if warped_distance(self, x, *q)? <= rho * (1.0 + GRAZE) + slack {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Exterior geodesics of a glued surface. Geodesics entering the neck are
/// not followed; they fail with [`Error::DomainExit`].
impl IsotropicSurface for GluedManifold {
    type Point = GluedPoint;

    fn shoot(&self, p: &GluedPoint, alpha: f64, length: f64) -> Result<GluedPoint> {
        let (side, x) = exterior_of(p)?;
        let model = self.side(side);
        let v = model.direction(x, alpha)?;
        let y = model.exp_map(x, &v, length)?;
        let clearance = model.segment_clearance(&model.origin(), x, &y);
        if clearance < self.r() * (1.0 - 1e-12) {
            return Err(Error::DomainExit { at: clearance });
        }
        self.exterior_at(side, &y)
    }

    fn distance(&self, a: &GluedPoint, b: &GluedPoint) -> Result<f64> {
        Ok(GluedManifold::distance(self, a, b))
    }

    fn meets(&self, p: &GluedPoint, alpha: f64, length: f64, region: &Region<GluedPoint>) -> Result<bool> {
        let (side, x) = exterior_of(p)?;
        let model = self.side(side);
        let v = model.direction(x, alpha)?;
        let y = model.exp_map(x, &v, length)?;
        let neck = model.segment_clearance(&model.origin(), x, &y) <= self.r() * (1.0 + GRAZE);
        match region {
            Region::Neck => Ok(neck),
            Region::Balls(balls) => {
                if balls.is_empty() {
                    return Ok(false);
                }
                if neck {
                    return Ok(true);
                }
                for (q, rho) in balls {
                    let hit = match (q.side(), q.exterior_point()) {
                        (Some(s), Some(c)) if s == side => model.segment_clearance(c, x, &y) <= rho * (1.0 + GRAZE),
                        // Other-side and neck centers: test the endpoints.
                        _ => {
                            let end = self.exterior_at(side, &y)?;
                            GluedManifold::distance(self, &end, q) <= *rho
                                || GluedManifold::distance(self, p, q) <= *rho
                        }
                    };
                    if hit {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

fn exterior_of(p: &GluedPoint) -> Result<(crate::neck::Side, &SpaceFormPoint)> {
    match (p.side(), p.exterior_point()) {
        (Some(s), Some(x)) => Ok((s, x)),
        _ => Err(Error::InvalidPoint("geodesic shooting needs an exterior base point".into())),
    }
}

/// A sampled set of directions on the unit circle, on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    bad: Vec<bool>,
}

impl DirectionSet {
    pub fn empty(count: usize) -> Self {
        Self { bad: vec![false; count] }
    }

    /// Marks the grid directions for which `pred` holds.
    pub fn from_predicate(count: usize, mut pred: impl FnMut(f64) -> bool) -> Self {
        let step = 2.0 * PI / count as f64;
        Self {
            bad: (0..count).map(|i| pred(step * i as f64)).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.bad.len()
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.bad.len() as f64
    }

    pub fn angle(&self, i: usize) -> f64 {
        self.step() * i as f64
    }

    pub fn is_bad_index(&self, i: usize) -> bool {
        self.bad[i % self.bad.len()]
    }

    /// Whether `alpha` may be bad: either neighbouring grid direction is.
    pub fn contains(&self, alpha: f64) -> bool {
        let x = alpha.rem_euclid(2.0 * PI) / self.step();
        let lo = x.floor() as usize;
        self.is_bad_index(lo) || self.is_bad_index(lo + 1)
    }

    pub fn bad_angles(&self) -> Vec<f64> {
        (0..self.count()).filter(|&i| self.bad[i]).map(|i| self.angle(i)).collect()
    }

    pub fn bad_count(&self) -> usize {
        self.bad.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.bad_count() == 0
    }
}

/// Directions from `p` whose geodesic of length `length` meets `region`.
pub fn bad_directions<S: IsotropicSurface>(
    space: &S,
    p: &S::Point,
    region: &Region<S::Point>,
    length: f64,
    count: usize,
) -> Result<DirectionSet> {
    if count < 3 {
        return Err(Error::domain("need at least 3 directions"));
    }
    let step = 2.0 * PI / count as f64;
    let bad = (0..count)
        .into_par_iter()
        .map(|i| space.meets(p, &step * i as f64, length, region))
        .collect::<Result<Vec<bool>>>()?;
    Ok(DirectionSet { bad })
}

/// Theta and radius grids of an estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropyGrid {
    pub thetas: Vec<f64>,
    pub radii: Vec<f64>,
}

impl IsotropyGrid {
    /// Multiples of `pi / 24` together with `pi / 5` and `pi / 7`, and five
    /// radii from `0` to `radius`.
    pub fn standard(radius: f64) -> Self {
        let mut thetas: Vec<f64> = (0..=24).map(|i| PI * i as f64 / 24.0).collect();
        thetas.extend([PI / 7.0, PI / 5.0]);
        thetas.sort_by(f64::total_cmp);
        Self {
            thetas,
            radii: (0..=4).map(|i| radius * i as f64 / 4.0).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.radii.is_empty() {
            return Err(Error::domain("grids must be nonempty"));
        }
        if self.thetas.iter().any(|&x| !(0.0..=PI).contains(&x)) {
            return Err(Error::domain("angles must lie in [0, pi]"));
        }
        if self.radii.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::domain("radii must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Measured isotropy function on a `(theta, s, t)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropyEstimate {
    theta_grid: Vec<f64>,
    radii_grid: Vec<f64>,
    f_hat: Vec<f64>,
    spread: Vec<f64>,
    samples: Vec<usize>,
    defect: f64,
}

impl IsotropyEstimate {
    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn radii_grid(&self) -> &[f64] {
        &self.radii_grid
    }

    fn cell(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.radii_grid.len();
        (i * n + j) * n + k
    }

    /// Mean measured distance at `(theta_i, s_j, t_k)`.
    pub fn f_hat(&self, i: usize, j: usize, k: usize) -> f64 {
        self.f_hat[self.cell(i, j, k)]
    }

    /// Largest minus smallest measured distance in the cell.
    pub fn spread(&self, i: usize, j: usize, k: usize) -> f64 {
        self.spread[self.cell(i, j, k)]
    }

    pub fn samples(&self, i: usize, j: usize, k: usize) -> usize {
        self.samples[self.cell(i, j, k)]
    }

    /// Largest spread over all cells.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// Index of `theta` in the grid, within `1e-12`.
    pub fn theta_index(&self, theta: f64) -> Option<usize> {
        self.theta_grid.iter().position(|&x| (x - theta).abs() < 1e-12)
    }

    pub fn radius_index(&self, r: f64) -> Option<usize> {
        self.radii_grid.iter().position(|&x| (x - r).abs() < 1e-12)
    }

    /// Looks up a grid value, if all three coordinates are grid points.
    pub fn lookup(&self, theta: f64, s: f64, t: f64) -> Option<f64> {
        Some(self.f_hat(self.theta_index(theta)?, self.radius_index(s)?, self.radius_index(t)?))
    }

    /// Largest `|F_hat - reference|` over the grid.
    pub fn max_deviation(&self, mut reference: impl FnMut(f64, f64, f64) -> Result<f64>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &th) in self.theta_grid.iter().enumerate() {
            for (j, &s) in self.radii_grid.iter().enumerate() {
                for (k, &t) in self.radii_grid.iter().enumerate() {
                    worst = worst.max((self.f_hat(i, j, k) - reference(th, s, t)?).abs());
                }
            }
        }
        Ok(worst)
    }

    /// CSV with columns `theta,s,t,F_hat,spread,n_samples`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,s,t,F_hat,spread,n_samples\n");
        for (i, &th) in self.theta_grid.iter().enumerate() {
            for (j, &s) in self.radii_grid.iter().enumerate() {
                for (k, &t) in self.radii_grid.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        fmt_num(th),
                        fmt_num(s),
                        fmt_num(t),
                        fmt_num(self.f_hat(i, j, k)),
                        fmt_num(self.spread(i, j, k)),
                        self.samples(i, j, k)
                    );
                }
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn set_f_hat(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let c = self.cell(i, j, k);
        self.f_hat[c] = v;
    }
}

/// Base angles for a cell: `n_dirs` pairs `(alpha, alpha + theta)` with both
/// directions good, taken from the grid in a fixed stride order.
fn direction_pairs(n_dirs: usize, theta: f64, bad: &DirectionSet) -> Result<Vec<f64>> {
    let count = bad.count();
    let stride = (count / n_dirs).max(1);
    let mut out = Vec::with_capacity(n_dirs);
    'outer: for offset in 0..stride {
        for m in 0..count.div_ceil(stride) {
            let i = m * stride + offset;
            if i >= count {
                continue;
            }
            let alpha = bad.angle(i);
            if !bad.is_bad_index(i) && !bad.contains(alpha + theta) {
                out.push(alpha);
                if out.len() == n_dirs {
                    break 'outer;
                }
            }
        }
    }
    if out.len() < n_dirs {
        return Err(Error::InsufficientDirections(format!(
            "only {} good direction pairs at angle {theta}, wanted {n_dirs}",
            out.len()
        )));
    }
    Ok(out)
}

/// Estimates the isotropy function about `p`.
///
/// Every cell shoots `n_dirs` direction pairs at angle `theta`, avoiding
/// `bad` when given, and records the mean and spread of the endpoint
/// distances. Radii above `radius` are rejected.
pub fn estimate_f<S: IsotropicSurface>(
    space: &S,
    p: &S::Point,
    radius: f64,
    n_dirs: usize,
    grid: &IsotropyGrid,
    bad: Option<&DirectionSet>,
) -> Result<IsotropyEstimate> {
    grid.validate()?;
    if n_dirs == 0 {
        return Err(Error::domain("n_dirs must be positive"));
    }
    if grid.radii.iter().any(|&x| x > radius * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("radii must lie in [0, {radius}]")));
    }
    let none = DirectionSet::empty(DIRECTION_COUNT);
    let bad = bad.unwrap_or(&none);
    let pairs = grid
        .thetas
        .iter()
        .map(|&th| direction_pairs(n_dirs, th, bad))
        .collect::<Result<Vec<_>>>()?;
    let n = grid.radii.len();
    let cells: Vec<(usize, usize, usize)> = (0..grid.thetas.len())
        .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
        .collect();
    let stats = cells
        .par_iter()
        .map(|&(i, j, k)| {
            let th = grid.thetas[i];
            let (s, t) = (grid.radii[j], grid.radii[k]);
            let mut sum = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &alpha in &pairs[i] {
                let x = space.shoot(p, alpha, s)?;
                let y = space.shoot(p, alpha + th, t)?;
                let d = space.distance(&x, &y)?;
                sum += d;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            Ok((sum / pairs[i].len() as f64, hi - lo, pairs[i].len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let defect = stats.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(IsotropyEstimate {
        theta_grid: grid.thetas.clone(),
        radii_grid: grid.radii.clone(),
        f_hat: stats.iter().map(|c| c.0).collect(),
        spread: stats.iter().map(|c| c.1).collect(),
        samples: stats.iter().map(|c| c.2).collect(),
        defect,
    })
}

/// Largest difference between estimates at different base points, over
/// shared grid cells.
pub fn cross_point_spread(estimates: &[IsotropyEstimate]) -> Result<f64> {
    let Some(first) = estimates.first() else {
        return Ok(0.0);
    };
    if estimates
        .iter()
        .any(|e| e.theta_grid != first.theta_grid || e.radii_grid != first.radii_grid)
    {
        return Err(Error::domain("estimates use different grids"));
    }
    Ok((0..first.f_hat.len())
        .map(|c| {
            let (lo, hi) = estimates
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.f_hat[c]), hi.max(e.f_hat[c])));
            hi - lo
        })
        .fold(0.0, f64::max))
}

/// Which property a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// Nondecreasing in theta.
    Monotone,
    /// `F(pi, t, t) > t`.
    Opposite,
    /// `F(0, 0, R) = R`.
    Radial,
    /// `F(a, t1, s) + F(b, s, t2) >= F(a + b, t1, t2)`.
    Triangle,
    /// `F(pi / k, t, t) > t / k`.
    Fraction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// `(theta, s, t)` grid indices.
    pub cell: (usize, usize, usize),
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub violations: Vec<AxiomViolation>,
    /// Checks that could not run because the grid lacks the needed points.
    pub skipped: Vec<Axiom>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

/// Rounding floor added to the `2 * defect` tolerance.
const NOISE_FLOOR: f64 = 1e-9;

/// Checks the isotropy-function properties on an estimate, each within
/// `2 * defect`.
pub fn verify_axioms(est: &IsotropyEstimate, radius: f64) -> AxiomReport {
    let tol = 2.0 * est.defect + NOISE_FLOOR;
    let th = &est.theta_grid;
    let rs = &est.radii_grid;
    let mut violations = Vec::new();
    let mut skipped = Vec::new();
    let mut flag = |axiom, cell, detail: String| violations.push(AxiomViolation { axiom, cell, detail });

    let mut order: Vec<usize> = (0..th.len()).collect();
    order.sort_by(|&a, &b| th[a].total_cmp(&th[b]));
    for j in 0..rs.len() {
        for k in 0..rs.len() {
            for w in order.windows(2) {
                let (a, b) = (est.f_hat(w[0], j, k), est.f_hat(w[1], j, k));
                if b < a - tol {
                    flag(Axiom::Monotone, (w[1], j, k), format!("F drops from {a} to {b}"));
                }
            }
        }
    }

    match est.theta_index(PI) {
        Some(i) => {
            for (j, &t) in rs.iter().enumerate().filter(|(_, &t)| t > 0.0) {
                let f = est.f_hat(i, j, j);
                if !(f > t - tol) {
                    flag(Axiom::Opposite, (i, j, j), format!("F(pi, {t}, {t}) = {f}"));
                }
            }
        }
        None => skipped.push(Axiom::Opposite),
    }

    match (est.theta_index(0.0), est.radius_index(0.0), est.radius_index(radius)) {
        (Some(i), Some(j), Some(k)) => {
            let f = est.f_hat(i, j, k);
            if (f - radius).abs() > tol {
                flag(Axiom::Radial, (i, j, k), format!("F(0, 0, R) = {f}, R = {radius}"));
            }
        }
        _ => skipped.push(Axiom::Radial),
    }

    for (a, &ta) in th.iter().enumerate() {
        for (b, &tb) in th.iter().enumerate() {
            let Some(c) = est.theta_index(ta + tb) else { continue };
            for t1 in 0..rs.len() {
                for s in 0..rs.len() {
                    for t2 in 0..rs.len() {
                        let lhs = est.f_hat(a, t1, s) + est.f_hat(b, s, t2);
                        let rhs = est.f_hat(c, t1, t2);
                        if lhs < rhs - 2.0 * tol {
                            flag(
                                Axiom::Triangle,
                                (c, t1, t2),
                                format!("F({ta},..) + F({tb},..) = {lhs} < F({},..) = {rhs}", ta + tb),
                            );
                        }
                    }
                }
            }
        }
    }

    let mut any_fraction = false;
    for k in 1..=8 {
        let Some(i) = est.theta_index(PI / k as f64) else { continue };
        any_fraction = true;
        for (j, &t) in rs.iter().enumerate().filter(|(_, &t)| t > 0.0) {
            let f = est.f_hat(i, j, j);
            if !(f > t / k as f64 - tol) {
                flag(Axiom::Fraction, (i, j, j), format!("F(pi/{k}, {t}, {t}) = {f}"));
            }
        }
    }
    if !any_fraction {
        skipped.push(Axiom::Fraction);
    }
    AxiomReport {
        tolerance: tol,
        violations,
        skipped,
    }
}

/// A cap of directions: center angle and radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cap {
    pub center: f64,
    pub radius: f64,
}

impl Cap {
    fn lo(&self) -> f64 {
        self.center - self.radius
    }

    fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

/// Angular distance on the circle.
fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionCapCover {
    pub caps: Vec<Cap>,
    /// Number of bad directions covered.
    pub covered: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnseenFailure {
    /// A cap has radius at least epsilon.
    CapTooLarge { cap: Cap, epsilon: f64 },
    /// Two tripled caps meet.
    TripledOverlap { a: Cap, b: Cap },
}

/// Smallest arc containing two arcs given as `(lo, hi)` with `lo <= hi`.
fn merge_caps(a: Cap, b: Cap) -> Cap {
    // Shift `b` to the copy nearest `a`.
    let shift = 2.0 * PI * ((a.center - b.center) / (2.0 * PI)).round();
    let b = Cap {
        center: b.center + shift,
        radius: b.radius,
    };
    let lo = a.lo().min(b.lo());
    let hi = a.hi().max(b.hi());
    if hi - lo >= 2.0 * PI {
        return Cap { center: 0.0, radius: PI };
    }
    Cap {
        center: (0.5 * (lo + hi)).rem_euclid(2.0 * PI),
        radius: (0.5 * (hi - lo)).min(PI),
    }
}

/// Covers the bad directions by caps and checks the almost unseen
/// condition: every radius below `epsilon` and the tripled caps disjoint.
///
/// Contiguous runs of bad grid directions become caps, widened by half a
/// grid step; caps whose tripled versions meet are merged until none do.
pub fn unseen_check(bad: &DirectionSet, epsilon: f64) -> Result<DirectionCapCover, UnseenFailure> {
    let n = bad.count();
    let step = bad.step();
    let covered = bad.bad_count();
    let mut caps = Vec::new();
    if covered == n {
        caps.push(Cap { center: 0.0, radius: PI });
    } else if covered > 0 {
        // Start the scan just after a good direction so runs do not wrap.
        let start = (0..n).find(|&i| !bad.is_bad_index(i)).expect("some good direction") + 1;
        let mut run: Option<(usize, usize)> = None;
        for m in 0..n {
            let i = start + m;
            if bad.is_bad_index(i) {
                run = Some(run.map_or((i, i), |(a, _)| (a, i)));
            } else if let Some((a, b)) = run.take() {
                caps.push(run_cap(a, b, step));
            }
        }
        if let Some((a, b)) = run {
            caps.push(run_cap(a, b, step));
        }
    }
    loop {
        let mut merged = false;
        'scan: for i in 0..caps.len() {
            for j in i + 1..caps.len() {
                if circle_gap(caps[i].center, caps[j].center) < 3.0 * (caps[i].radius + caps[j].radius) {
                    let m = merge_caps(caps[i], caps[j]);
                    caps[i] = m;
                    caps.swap_remove(j);
                    merged = true;
                    break 'scan;
                }
            }
        }
        if !merged || caps.len() <= 1 {
            break;
        }
    }
    for (i, a) in caps.iter().enumerate() {
        if a.radius >= epsilon {
            return Err(UnseenFailure::CapTooLarge { cap: *a, epsilon });
        }
        for b in &caps[i + 1..] {
            if circle_gap(a.center, b.center) < 3.0 * (a.radius + b.radius) {
                return Err(UnseenFailure::TripledOverlap { a: *a, b: *b });
            }
        }
    }
    Ok(DirectionCapCover { caps, covered })
}

fn run_cap(a: usize, b: usize, step: f64) -> Cap {
    let lo = step * a as f64 - 0.5 * step;
    let hi = step * b as f64 + 0.5 * step;
    Cap {
        center: (0.5 * (lo + hi)).rem_euclid(2.0 * PI),
        radius: 0.5 * (hi - lo),
    }
}

/// Packing counts `f(s, t)` indexed by their arguments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PackingTable {
    entries: Vec<(f64, f64, usize)>,
}

impl PackingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: f64, t: f64, count: usize) {
        self.entries.retain(|e| !((e.0 - s).abs() < 1e-12 && (e.1 - t).abs() < 1e-12));
        self.entries.push((s, t, count));
    }

    pub fn get(&self, s: f64, t: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| (e.0 - s).abs() < 1e-12 && (e.1 - t).abs() < 1e-12)
            .map(|e| e.2)
    }

    /// Every count scaled by `factor`, rounded down and at least 1.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|&(s, t, c)| (s, t, ((c as f64 * factor).floor() as usize).max(1)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Est2Report {
    pub passed: bool,
    /// `pi / (2 f(h/2, R + h/2))`.
    pub theta_bound: f64,
    /// Largest `F_hat(theta, t, t)` over grid angles below the bound.
    pub worst: f64,
    /// `(theta, t)` grid indices of a failing cell.
    pub failure: Option<(usize, usize)>,
}

/// Checks `F_hat(theta, t, t) < h` for grid angles below
/// `pi / (2 f(h/2, R + h/2))`.
pub fn est2_predicate(est: &IsotropyEstimate, f: &PackingTable, radius: f64, h: f64) -> Result<Est2Report> {
    if !(h > 0.0) {
        return Err(Error::domain("h must be positive"));
    }
    let count = f.get(0.5 * h, radius + 0.5 * h).ok_or_else(|| {
        Error::precondition(format!("packing table lacks f({}, {})", 0.5 * h, radius + 0.5 * h))
    })?;
    let theta_bound = PI / (2.0 * count.max(1) as f64);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for (i, &th) in est.theta_grid.iter().enumerate() {
        if th >= theta_bound {
            continue;
        }
        for j in 0..est.radii_grid.len() {
            let v = est.f_hat(i, j, j);
            worst = worst.max(v);
            if !(v < h) && failure.is_none() {
                failure = Some((i, j));
            }
        }
    }
    Ok(Est2Report {
        passed: failure.is_none(),
        theta_bound,
        worst,
        failure,
    })
}
