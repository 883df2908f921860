//! Two space forms joined through a Schwarzschild neck.
//!
//! Around the center `p_i` of each side the ball `B(p_i, r)` is replaced by
//! the annulus `m/2 <= t <= r` with metric `h(t) (dt^2 + f(t)^2 dphi^2)`.
//! Below `r/2` this is the spatial Schwarzschild metric in isotropic
//! coordinates, and the two annuli are joined along the throat `t = m/2`,
//! the fixed circle of the inversion `t -> m^2 / (4t)`.
//!
//! Distances inside the neck come from a rotationally symmetric graph.
//! The exteriors `t >= r` keep their space-form metric, for which the
//! shortest path avoiding the excised ball is known in closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metricspace::{NetSource, Provenance};
use crate::numeric::{dijkstra, gauss_legendre, smoothstep5};
use crate::spaceform::{law_of_cosines, sn, SpaceFormParams, SpaceFormPoint};

/// Nodes per neck circle.
pub const ANGULAR_NODES: usize = 288;
/// Portal nodes per boundary circle `t = r`.
pub const PORTALS: usize = 72;
const PORTAL_STRIDE: usize = ANGULAR_NODES / PORTALS;
/// Radial node spacing as a fraction of `r`.
const RADIAL_FRACTION: f64 = 1.0 / 40.0;
/// Largest angular offset of a graph edge, in nodes.
const MAX_DK: usize = 8;
/// Offset between the two sides in the sampling chart.
const CHART_SHIFT: f64 = 1.0e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    fn from_index(i: usize) -> Side {
        if i == 0 {
            Side::One
        } else {
            Side::Two
        }
    }
}

/// Conformal factor and warp function of one neck half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckProfile {
    pub side: Side,
    pub curvature: f64,
    pub r: f64,
    pub m: f64,
}

impl NeckProfile {
    pub fn throat(&self) -> f64 {
        0.5 * self.m
    }

    /// `(1 + m/(2t))^4`.
    pub fn schwarzschild(&self, t: f64) -> f64 {
        (1.0 + self.m / (2.0 * t)).powi(4)
    }

    fn blend(&self, t: f64) -> f64 {
        let half = 0.5 * self.r;
        smoothstep5((t - half) / half).0
    }

    /// Conformal factor: Schwarzschild up to `r/2`, `1` from `r` on.
    pub fn h(&self, t: f64) -> f64 {
        let s = self.blend(t);
        1.0 + (self.schwarzschild(t) - 1.0) * (1.0 - s)
    }

    /// Warp function: `t` up to `r/2`, `sn_K(t)` from `r` on.
    pub fn f_neck(&self, t: f64) -> f64 {
        let s = self.blend(t);
        t + (sn(self.curvature, t) - t) * s
    }

    /// `(g_tt, g_phiphi)` of the metric at radius `t`.
    pub fn metric(&self, t: f64) -> (f64, f64) {
        let h = self.h(t);
        let f = self.f_neck(t);
        (h, h * f * f)
    }
}

/// Side and position of a graph node; throat nodes belong to both sides.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodePosition {
    pub side: Option<Side>,
    pub level: usize,
    pub t: f64,
    pub phi: f64,
}

/// Diameter of the neck region measured on the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct NeckDiameter {
    pub value: f64,
    /// `16 (r + 4 r^2)`.
    pub bound: f64,
    pub warning: Option<String>,
}

/// Structured description written next to experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedDescription {
    pub curvature_1: f64,
    pub curvature_2: f64,
    pub r: f64,
    pub m: f64,
    pub epsilon_target: f64,
    pub mass_rule: String,
    pub blend: String,
    /// `[r/2, r]`.
    pub blend_knots: [f64; 2],
    pub levels_per_side: usize,
    pub angular_nodes: usize,
    pub portals_per_side: usize,
}

/// The glued surface `M_r`.
#[derive(Debug)]
pub struct GluedManifold {
    sides: [SpaceFormParams; 2],
    necks: [NeckProfile; 2],
    r: f64,
    m: f64,
    epsilon_target: f64,
    /// Coordinate radius of each level, `levels[0] = m/2`, `levels[L] = r`.
    levels: Vec<f64>,
    /// `weights[side][level][dl][dk]` for edges from `level` to `level + dl`.
    weights: [Vec<[[f64; MAX_DK + 1]; 3]>; 2],
    /// Distances from the node at angle 0 of every level, indexed like
    /// `level_source`.
    tables: Vec<Vec<f64>>,
    /// `portal_dist[s][s2][j]`: graph distance from portal 0 on side `s`
    /// to portal `j` on side `s2`.
    portal_dist: [[Vec<f64>; 2]; 2],
}

/// The preconditions of [`build_glued`], checked without building.
pub fn check_glued(k1: f64, k2: f64, r: f64, epsilon_target: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("radius {r} must be positive")));
    }
    if !(epsilon_target > 0.0 && epsilon_target <= PI) {
        return Err(Error::domain(format!("epsilon {epsilon_target} must lie in (0, pi]")));
    }
    for (i, &k) in [k1, k2].iter().enumerate() {
        let fk = sn(k, r);
        if !(fk < 2.0 * r) {
            return Err(Error::precondition(format!(
                "side {}: f_K(r) = {fk} is not below 2r = {}",
                i + 1,
                2.0 * r
            )));
        }
        let cap = law_of_cosines(k, epsilon_target, epsilon_target, epsilon_target)?;
        if !(r < cap) {
            return Err(Error::precondition(format!(
                "side {}: r = {r} is not below F_K(eps, eps, eps) = {cap}",
                i + 1
            )));
        }
        if k > 0.0 && r >= 0.5 * PI / k.sqrt() {
            return Err(Error::precondition(format!(
                "side {}: r = {r} must be below a quarter great circle",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Builds `M_r` from two surfaces of curvatures `k1`, `k2`, with neck
/// radius `r` and mass `m = r^2 / 4`.
///
/// Requires `f_K(r) < 2r` and `r < F_K(eps, eps, eps)` on both sides.
pub fn build_glued(k1: f64, k2: f64, r: f64, epsilon_target: f64) -> Result<GluedManifold> {
    check_glued(k1, k2, r, epsilon_target)?;
    let m = 0.25 * r * r;
    let sides = [SpaceFormParams::surface(k1)?, SpaceFormParams::surface(k2)?];
    let necks = [
        NeckProfile { side: Side::One, curvature: k1, r, m },
        NeckProfile { side: Side::Two, curvature: k2, r, m },
    ];
    let levels = radial_levels(&necks[0], r);
    let dphi = 2.0 * PI / ANGULAR_NODES as f64;
    let weights = [0, 1].map(|s| edge_weights(&necks[s], &levels, dphi));
    let mut g = GluedManifold {
        sides,
        necks,
        r,
        m,
        epsilon_target,
        levels,
        weights,
        tables: Vec::new(),
        portal_dist: Default::default(),
    };
    let sources: Vec<usize> = (0..g.level_sources()).map(|i| g.level_source_node(i)).collect();
    g.tables = sources.iter().map(|&v| g.shortest_paths(v)).collect();
    let l = g.top_level();
    let mut raw = [[vec![0.0; PORTALS], vec![0.0; PORTALS]], [vec![0.0; PORTALS], vec![0.0; PORTALS]]];
    for s in 0..2 {
        let table = &g.tables[g.level_source_index(Some(Side::from_index(s)), l)];
        for s2 in 0..2 {
            for j in 0..PORTALS {
                raw[s][s2][j] = table[g.node(Some(Side::from_index(s2)), l, j * PORTAL_STRIDE)];
            }
        }
    }
    // Enforce the reflection and side-swap symmetries exactly.
    let mut pd: [[Vec<f64>; 2]; 2] = Default::default();
    for s in 0..2 {
        pd[s][s] = (0..PORTALS).map(|j| raw[s][s][j].min(raw[s][s][(PORTALS - j) % PORTALS])).collect();
    }
    pd[0][1] = (0..PORTALS).map(|j| raw[0][1][j].min(raw[1][0][(PORTALS - j) % PORTALS])).collect();
    pd[1][0] = (0..PORTALS).map(|j| pd[0][1][(PORTALS - j) % PORTALS]).collect();
    g.portal_dist = pd;
    Ok(g)
}

/// Levels uniform in radial arclength `int sqrt(h) dt`, spaced at most
/// `r/40`.
fn radial_levels(neck: &NeckProfile, r: f64) -> Vec<f64> {
    let a = neck.throat();
    let arclength = |t: f64| gauss_legendre(|u| neck.h(u).sqrt(), a, t, 16);
    let total = arclength(r);
    let n = (total / (RADIAL_FRACTION * r)).ceil() as usize;
    let mut levels = vec![a];
    for l in 1..n {
        let target = total * l as f64 / n as f64;
        let (mut lo, mut hi) = (a, r);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if arclength(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        levels.push(0.5 * (lo + hi));
    }
    levels.push(r);
    levels
}

fn primitive(dl: usize, dk: usize) -> bool {
    match dl {
        0 => dk == 1,
        1 => true,
        _ => dk % 2 == 1,
    }
}

/// Lengths of straight coordinate segments from `(levels[l], 0)` to
/// `(levels[l + dl], dk dphi)`.
fn edge_weights(neck: &NeckProfile, levels: &[f64], dphi: f64) -> Vec<[[f64; MAX_DK + 1]; 3]> {
    let top = levels.len() - 1;
    (0..=top)
        .map(|l| {
            let mut w = [[f64::INFINITY; MAX_DK + 1]; 3];
            for dl in 0..3 {
                if l + dl > top {
                    continue;
                }
                let (t0, t1) = (levels[l], levels[l + dl]);
                for dk in 0..=MAX_DK {
                    if !primitive(dl, dk) {
                        continue;
                    }
                    let angle = dk as f64 * dphi;
                    w[dl][dk] = gauss_legendre(
                        |u| {
                            let t = t0 + u * (t1 - t0);
                            let f = neck.f_neck(t);
                            neck.h(t).sqrt() * ((t1 - t0).powi(2) + (f * angle).powi(2)).sqrt()
                        },
                        0.0,
                        1.0,
                        2,
                    );
                }
            }
            w
        })
        .collect()
}

/// Shortest path in the exterior `t >= r` of a space form between points
/// given in polar coordinates about the excised center.
pub fn exterior_distance(k: f64, r: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let dphi = angle_gap(a.1, b.1);
    let (ba, bb) = (tangent_angle(k, r, a.0), tangent_angle(k, r, b.0));
    if dphi <= ba + bb {
        law_of_cosines(k, dphi, a.0, b.0).unwrap_or(f64::INFINITY)
    } else {
        tangent_length(k, r, a.0) + tangent_length(k, r, b.0) + sn(k, r) * (dphi - ba - bb)
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Angle at the center between a point at distance `t` and the tangency
/// point of a geodesic from it to the circle of radius `r`.
fn tangent_angle(k: f64, r: f64, t: f64) -> f64 {
    let c = if k == 0.0 {
        r / t
    } else if k > 0.0 {
        let q = k.sqrt();
        (q * r).tan() / (q * t).tan()
    } else {
        let q = (-k).sqrt();
        (q * r).tanh() / (q * t).tanh()
    };
    c.clamp(-1.0, 1.0).acos()
}

/// Length of the tangent geodesic from distance `t` to the circle of
/// radius `r`.
fn tangent_length(k: f64, r: f64, t: f64) -> f64 {
    if k == 0.0 {
        (t * t - r * r).max(0.0).sqrt()
    } else if k > 0.0 {
        let q = k.sqrt();
        ((q * t).cos() / (q * r).cos()).clamp(-1.0, 1.0).acos() / q
    } else {
        let q = (-k).sqrt();
        ((q * t).cosh() / (q * r).cosh()).max(1.0).acosh() / q
    }
}

#[derive(Clone, Debug)]
enum Region {
    Exterior {
        side: Side,
        t: f64,
        phi: f64,
        point: SpaceFormPoint,
        /// Exterior distances to the portals of this side.
        to_portals: Arc<[f64]>,
    },
    Neck {
        node: usize,
    },
}

/// A point of `M_r` tagged with its region.
#[derive(Clone, Debug)]
pub struct GluedPoint {
    region: Region,
    /// Cheapest cost to each of the `2 * PORTALS` portals (side-major).
    portal_cost: Arc<[f64]>,
}

impl GluedPoint {
    pub fn side(&self) -> Option<Side> {
        match &self.region {
            Region::Exterior { side, .. } => Some(*side),
            Region::Neck { .. } => None,
        }
    }

    pub fn is_neck(&self) -> bool {
        matches!(self.region, Region::Neck { .. })
    }

    /// Model point of an exterior point.
    pub fn exterior_point(&self) -> Option<&SpaceFormPoint> {
        match &self.region {
            Region::Exterior { point, .. } => Some(point),
            Region::Neck { .. } => None,
        }
    }

    /// Polar coordinates `(t, phi)` about the center of the point's side.
    pub fn polar(&self) -> Option<(f64, f64)> {
        match &self.region {
            Region::Exterior { t, phi, .. } => Some((*t, *phi)),
            Region::Neck { .. } => None,
        }
    }

    pub fn node(&self) -> Option<usize> {
        match &self.region {
            Region::Neck { node } => Some(*node),
            Region::Exterior { .. } => None,
        }
    }
}

impl GluedManifold {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn epsilon_target(&self) -> f64 {
        self.epsilon_target
    }

    pub fn side(&self, side: Side) -> &SpaceFormParams {
        &self.sides[side.index()]
    }

    pub fn neck(&self, side: Side) -> &NeckProfile {
        &self.necks[side.index()]
    }

    /// Coordinate radii of the neck levels, from the throat to `r`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn node_count(&self) -> usize {
        ANGULAR_NODES * (2 * self.top_level() + 1)
    }

    fn node(&self, side: Option<Side>, level: usize, k: usize) -> usize {
        let k = k % ANGULAR_NODES;
        match (level, side) {
            (0, _) => k,
            (_, Some(s)) => ANGULAR_NODES * (1 + s.index() * self.top_level() + level - 1) + k,
            (_, None) => panic!("off-throat nodes need a side"),
        }
    }

    fn decode(&self, node: usize) -> (Option<Side>, usize, usize) {
        let k = node % ANGULAR_NODES;
        let block = node / ANGULAR_NODES;
        if block == 0 {
            return (None, 0, k);
        }
        let l = self.top_level();
        let s = (block - 1) / l;
        (Some(Side::from_index(s)), (block - 1) % l + 1, k)
    }

    pub fn node_position(&self, node: usize) -> NodePosition {
        let (side, level, k) = self.decode(node);
        NodePosition {
            side,
            level,
            t: self.levels[level],
            phi: 2.0 * PI * k as f64 / ANGULAR_NODES as f64,
        }
    }

    fn level_sources(&self) -> usize {
        2 * self.top_level() + 1
    }

    fn level_source_index(&self, side: Option<Side>, level: usize) -> usize {
        match (level, side) {
            (0, _) => 0,
            (_, Some(s)) => 1 + s.index() * self.top_level() + level - 1,
            (_, None) => panic!("off-throat nodes need a side"),
        }
    }

    fn level_source_node(&self, index: usize) -> usize {
        index * ANGULAR_NODES
    }

    fn for_each_edge(&self, v: usize, visit: &mut dyn FnMut(usize, f64)) {
        let (side, l, k) = self.decode(v);
        let top = self.top_level();
        let sides: &[Side] = match side {
            Some(Side::One) => &[Side::One],
            Some(Side::Two) => &[Side::Two],
            None => &[Side::One, Side::Two],
        };
        for &s in sides {
            let w = &self.weights[s.index()];
            for dl in 0..3usize {
                for dk in 0..=MAX_DK {
                    if !primitive(dl, dk) {
                        continue;
                    }
                    // Upward edges, and downward ones that stay on this side
                    // or end on the throat.
                    if l + dl <= top && !(dl == 0 && l == 0 && s == Side::Two) {
                        let weight = w[l][dl][dk];
                        let target_side = if l + dl == 0 { None } else { Some(s) };
                        visit(self.node(target_side, l + dl, k + dk), weight);
                        if dk > 0 {
                            visit(self.node(target_side, l + dl, k + ANGULAR_NODES - dk), weight);
                        }
                    }
                    if dl > 0 && l >= dl && side.is_some() {
                        let weight = w[l - dl][dl][dk];
                        let target_side = if l == dl { None } else { Some(s) };
                        visit(self.node(target_side, l - dl, k + dk), weight);
                        if dk > 0 {
                            visit(self.node(target_side, l - dl, k + ANGULAR_NODES - dk), weight);
                        }
                    }
                }
            }
        }
    }

    fn shortest_paths(&self, source: usize) -> Vec<f64> {
        dijkstra(self.node_count(), source, |v, visit| self.for_each_edge(v, visit))
    }

    /// Graph distance between two nodes, using rotational symmetry.
    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        let (sa, la, ka) = self.decode(a);
        let (sb, lb, kb) = self.decode(b);
        let table = &self.tables[self.level_source_index(sa, la)];
        table[self.node(sb, lb, kb + ANGULAR_NODES - ka)]
    }

    fn portal_node(&self, side: Side, j: usize) -> usize {
        self.node(Some(side), self.top_level(), j * PORTAL_STRIDE)
    }

    /// Graph distance between portals `(s, i)` and `(s2, j)`.
    fn portal_gap(&self, s: usize, i: usize, s2: usize, j: usize) -> f64 {
        self.portal_dist[s][s2][(j + PORTALS - i) % PORTALS]
    }

    /// Exterior point at polar coordinates `(t, phi)` about the center of
    /// `side`, with `t >= r`.
    pub fn exterior(&self, side: Side, t: f64, phi: f64) -> Result<GluedPoint> {
        if !(t >= self.r * (1.0 - 1e-12)) || !t.is_finite() {
            return Err(Error::InvalidPoint(format!("t = {t} lies inside the neck radius {}", self.r)));
        }
        let model = self.side(side);
        if let Some(d) = model.diameter() {
            if t >= d - self.r {
                return Err(Error::InvalidPoint(format!("t = {t} too close to the antipode")));
            }
        }
        let t = t.max(self.r);
        let phi = phi.rem_euclid(2.0 * PI);
        let point = model.polar(t, phi)?;
        let k = model.curvature();
        let s = side.index();
        let to_portals: Arc<[f64]> = (0..PORTALS)
            .map(|j| exterior_distance(k, self.r, (t, phi), (self.r, self.portal_angle(j))))
            .collect();
        let portal_cost = (0..2 * PORTALS)
            .map(|b| {
                let (s2, j) = (b / PORTALS, b % PORTALS);
                (0..PORTALS)
                    .map(|i| to_portals[i] + self.portal_gap(s, i, s2, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(GluedPoint {
            region: Region::Exterior {
                side,
                t,
                phi,
                point,
                to_portals,
            },
            portal_cost,
        })
    }

    /// Exterior point from model coordinates of `side`.
    pub fn exterior_at(&self, side: Side, p: &SpaceFormPoint) -> Result<GluedPoint> {
        let model = self.side(side);
        model.validate(p)?;
        let (t, phi) = model.polar_coords(p);
        self.exterior(side, t, phi)
    }

    /// The neck node nearest to coordinate radius `t` and angle `phi`.
    pub fn neck_point(&self, side: Side, t: f64, phi: f64) -> Result<GluedPoint> {
        if !(t >= self.neck(side).throat() && t <= self.r) {
            return Err(Error::InvalidPoint(format!(
                "t = {t} outside the neck [{}, {}]",
                self.neck(side).throat(),
                self.r
            )));
        }
        let level = self
            .levels
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("levels are nonempty");
        let k = (phi.rem_euclid(2.0 * PI) / (2.0 * PI) * ANGULAR_NODES as f64).round() as usize;
        Ok(self.node_point(self.node(Some(side), level, k)))
    }

    /// Point on the throat circle at angle `phi`.
    pub fn throat_point(&self, phi: f64) -> GluedPoint {
        let k = (phi.rem_euclid(2.0 * PI) / (2.0 * PI) * ANGULAR_NODES as f64).round() as usize;
        self.node_point(self.node(None, 0, k))
    }

    pub fn node_point(&self, node: usize) -> GluedPoint {
        let portal_cost = (0..2 * PORTALS)
            .map(|b| self.node_distance(node, self.portal_node(Side::from_index(b / PORTALS), b % PORTALS)))
            .collect();
        GluedPoint {
            region: Region::Neck { node },
            portal_cost,
        }
    }

    fn portal_angle(&self, j: usize) -> f64 {
        2.0 * PI * (j * PORTAL_STRIDE) as f64 / ANGULAR_NODES as f64
    }

    /// Intrinsic distance in `M_r`.
    pub fn distance(&self, a: &GluedPoint, b: &GluedPoint) -> f64 {
        match (&a.region, &b.region) {
            (
                Region::Exterior { side: sa, t: ta, phi: pa, .. },
                Region::Exterior { side: sb, t: tb, phi: pb, to_portals, .. },
            ) => {
                let direct = if sa == sb {
                    exterior_distance(self.side(*sa).curvature(), self.r, (*ta, *pa), (*tb, *pb))
                } else {
                    f64::INFINITY
                };
                let off = sb.index() * PORTALS;
                (0..PORTALS)
                    .map(|j| a.portal_cost[off + j] + to_portals[j])
                    .fold(direct, f64::min)
            }
            (Region::Exterior { .. }, Region::Neck { .. }) => self.distance(b, a),
            (Region::Neck { .. }, Region::Exterior { side, to_portals, .. }) => {
                let off = side.index() * PORTALS;
                (0..PORTALS)
                    .map(|j| a.portal_cost[off + j] + to_portals[j])
                    .fold(f64::INFINITY, f64::min)
            }
            (Region::Neck { node: u }, Region::Neck { node: v }) => self.node_distance(*u, *v),
        }
    }

    /// Largest graph distance between neck nodes, compared with the bound
    /// `16 (r + 4 r^2)`.
    pub fn neck_diameter(&self) -> NeckDiameter {
        let value = self
            .tables
            .iter()
            .flat_map(|t| t.iter().copied())
            .fold(0.0, f64::max);
        let bound = 16.0 * (self.r + 4.0 * self.r * self.r);
        let warning = if value >= 0.95 * bound {
            Some(format!("graph estimate {value} is within 5% of the bound {bound}; refine the sampling"))
        } else {
            None
        };
        NeckDiameter { value, bound, warning }
    }

    pub fn describe(&self) -> GluedDescription {
        GluedDescription {
            curvature_1: self.sides[0].curvature(),
            curvature_2: self.sides[1].curvature(),
            r: self.r,
            m: self.m,
            epsilon_target: self.epsilon_target,
            mass_rule: "m = r^2 / 4".into(),
            blend: "quintic smoothstep on [r/2, r]".into(),
            blend_knots: [0.5 * self.r, self.r],
            levels_per_side: self.top_level(),
            angular_nodes: ANGULAR_NODES,
            portals_per_side: PORTALS,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.describe()).map_err(|e| Error::Config(e.to_string()))
    }

    fn random_neck_node(&self, side: Side, t: f64, phi: f64) -> GluedPoint {
        let a = self.neck(side).throat();
        let coord = a + t / self.r * (self.r - a);
        self.neck_point(side, coord.clamp(a, self.r), phi)
            .expect("clamped into the neck")
    }

    /// How far `p` sits outside the neck: `t - r` for exterior points.
    fn depth(&self, p: &GluedPoint) -> f64 {
        match &p.region {
            Region::Exterior { t, .. } => t - self.r,
            Region::Neck { .. } => 0.0,
        }
    }
}

impl NetSource for GluedManifold {
    type Point = GluedPoint;

    fn distance(&self, a: &GluedPoint, b: &GluedPoint) -> Result<f64> {
        Ok(GluedManifold::distance(self, a, b))
    }

    fn random_candidate(&self, center: &GluedPoint, radius: f64, rng: &mut dyn RngCore) -> Result<GluedPoint> {
        let side = if rng.gen::<bool>() { Side::One } else { Side::Two };
        let reach = radius + self.depth(center) + self.r;
        let t = reach * rng.gen::<f64>().sqrt();
        let phi = rng.gen_range(0.0..2.0 * PI);
        if t < self.r {
            return Ok(self.random_neck_node(side, t, phi));
        }
        match self.exterior(side, t, phi) {
            Ok(p) => Ok(p),
            // Beyond the antipode of a sphere: fall back to the neck.
            Err(Error::InvalidPoint(_)) => Ok(self.random_neck_node(side, 0.0, phi)),
            Err(e) => Err(e),
        }
    }

    fn lattice(&self, center: &GluedPoint, radius: f64, spacing: f64) -> Result<Vec<GluedPoint>> {
        let reach = radius + self.depth(center) + self.r + spacing;
        let mut out = Vec::new();
        for side in [Side::One, Side::Two] {
            let model = self.side(side);
            let reach = model.diameter().map_or(reach, |d| reach.min(d - 2.0 * self.r));
            for (t, phi) in crate::metricspace::polar_lattice(model.curvature(), reach, spacing) {
                if t >= self.r {
                    out.push(self.exterior(side, t, phi)?);
                }
            }
        }
        out.extend((0..self.node_count()).map(|v| self.node_point(v)));
        Ok(out)
    }

    fn chart(&self, p: &GluedPoint) -> [f64; 2] {
        let (side, t, phi) = match &p.region {
            Region::Exterior { side, t, phi, .. } => (Some(*side), *t, *phi),
            Region::Neck { node } => {
                let pos = self.node_position(*node);
                (pos.side, pos.t, pos.phi)
            }
        };
        let shift = if side == Some(Side::Two) { CHART_SHIFT } else { 0.0 };
        [t * phi.cos() + shift, t * phi.sin()]
    }

    fn provenance(&self, p: &GluedPoint) -> Provenance {
        match &p.region {
            Region::Exterior { side, point, .. } => Provenance {
                source: format!("glued side {}", side.index() + 1),
                coords: point.coords().to_vec(),
            },
            Region::Neck { node } => {
                let pos = self.node_position(*node);
                let side = pos.side.map_or(0.0, |s| (s.index() + 1) as f64);
                Provenance {
                    source: "glued neck".into(),
                    coords: vec![side, pos.t, pos.phi],
                }
            }
        }
    }
}
