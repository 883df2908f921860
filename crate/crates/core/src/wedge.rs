//! The limit space: space forms joined at finitely many junction points,
//! and the experiments comparing it with the glued surfaces.

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metricspace::{
    epsilon_net_points, gh_lower, gh_upper, polar_lattice, Correspondence, FiniteMetricSpace, GhOptions, Label,
    NetOptions, NetSource, Provenance,
};
use crate::neck::{build_glued, GluedManifold, GluedPoint, Side};
use crate::numeric::dijkstra;
use crate::isotropy::{bad_directions, estimate_f, unseen_check, IsotropyGrid, Region, DIRECTION_COUNT};
use crate::spaceform::{ball_volume, invert_angle, law_of_cosines, SpaceFormParams, SpaceFormPoint};

/// Identification of `a.1` in component `a.0` with `b.1` in component
/// `b.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    pub a: (usize, SpaceFormPoint),
    pub b: (usize, SpaceFormPoint),
}

/// A point of a wedge: component index and model point.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgePoint {
    pub component: usize,
    pub point: SpaceFormPoint,
}

/// Space forms glued at junction points, with the quotient metric.
#[derive(Clone, Debug)]
pub struct WedgeSpace {
    components: Vec<SpaceFormParams>,
    junctions: Vec<Junction>,
    min_separation: f64,
    /// Distinct junction points, as `(component, point)`.
    sites: Vec<WedgePoint>,
    /// Shortest distances between sites.
    site_dist: Vec<Vec<f64>>,
}

impl WedgeSpace {
    /// Validates the configuration: junction points of one component are at
    /// least `2 * min_separation` apart and the components are connected.
    pub fn new(components: Vec<SpaceFormParams>, junctions: Vec<Junction>, min_separation: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a wedge needs at least one component"));
        }
        let mut sites: Vec<WedgePoint> = Vec::new();
        let site_of = |c: usize, p: &SpaceFormPoint, sites: &mut Vec<WedgePoint>| -> Result<usize> {
            let model = components
                .get(c)
                .ok_or_else(|| Error::domain(format!("junction names missing component {c}")))?;
            model.validate(p)?;
            if let Some(i) = sites
                .iter()
                .position(|s| s.component == c && model.distance_unchecked(s.point.coords(), p.coords()) <= 1e-12)
            {
                return Ok(i);
            }
            sites.push(WedgePoint {
                component: c,
                point: p.clone(),
            });
            Ok(sites.len() - 1)
        };
        let mut glue = Vec::new();
        for j in &junctions {
            let a = site_of(j.a.0, &j.a.1, &mut sites)?;
            let b = site_of(j.b.0, &j.b.1, &mut sites)?;
            glue.push((a, b));
        }
        for (i, s) in sites.iter().enumerate() {
            for t in &sites[i + 1..] {
                if s.component != t.component {
                    continue;
                }
                let d = components[s.component].distance_unchecked(s.point.coords(), t.point.coords());
                if d < 2.0 * min_separation {
                    return Err(Error::precondition(format!(
                        "junction points of component {} are {d} apart, below 2R = {}",
                        s.component,
                        2.0 * min_separation
                    )));
                }
            }
        }
        // Components joined through the junctions.
        let nc = components.len();
        let comp_graph = dijkstra(nc, 0, |v, visit| {
            for &(a, b) in &glue {
                let (ca, cb) = (sites[a].component, sites[b].component);
                if ca == v {
                    visit(cb, 1.0);
                }
                if cb == v {
                    visit(ca, 1.0);
                }
            }
        });
        if let Some(c) = comp_graph.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected(format!("component {c} is not reachable through the junctions")));
        }
        let n = sites.len();
        let site_dist = (0..n)
            .map(|src| {
                dijkstra(n, src, |v, visit| {
                    for (w, s) in sites.iter().enumerate() {
                        if w != v && s.component == sites[v].component {
                            let model = &components[s.component];
                            visit(w, model.distance_unchecked(s.point.coords(), sites[v].point.coords()));
                        }
                    }
                    for &(a, b) in &glue {
                        if a == v {
                            visit(b, 0.0);
                        }
                        if b == v {
                            visit(a, 0.0);
                        }
                    }
                })
            })
            .collect();
        Ok(Self {
            components,
            junctions,
            min_separation,
            sites,
            site_dist,
        })
    }

    /// Two surfaces joined at their origins.
    pub fn pair(k1: f64, k2: f64) -> Result<Self> {
        let a = SpaceFormParams::surface(k1)?;
        let b = SpaceFormParams::surface(k2)?;
        let j = Junction {
            a: (0, a.origin()),
            b: (1, b.origin()),
        };
        Self::new(vec![a, b], vec![j], 0.0)
    }

    pub fn components(&self) -> &[SpaceFormParams] {
        &self.components
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Distinct junction points.
    pub fn sites(&self) -> &[WedgePoint] {
        &self.sites
    }

    pub fn point(&self, component: usize, coords: Vec<f64>) -> Result<WedgePoint> {
        let model = self
            .components
            .get(component)
            .ok_or_else(|| Error::InvalidPoint(format!("no component {component}")))?;
        Ok(WedgePoint {
            component,
            point: model.point(coords)?,
        })
    }

    /// Point at polar coordinates about the origin of `component`.
    pub fn polar(&self, component: usize, t: f64, phi: f64) -> Result<WedgePoint> {
        let model = self
            .components
            .get(component)
            .ok_or_else(|| Error::InvalidPoint(format!("no component {component}")))?;
        Ok(WedgePoint {
            component,
            point: model.polar(t, phi)?,
        })
    }

    fn leg(&self, p: &WedgePoint, site: usize) -> f64 {
        let s = &self.sites[site];
        if s.component != p.component {
            return f64::INFINITY;
        }
        self.components[p.component].distance_unchecked(p.point.coords(), s.point.coords())
    }

    /// Quotient distance: the direct distance within a component, or the
    /// best route entering and leaving the junction graph.
    pub fn distance(&self, x: &WedgePoint, y: &WedgePoint) -> Result<f64> {
        for p in [x, y] {
            let model = self
                .components
                .get(p.component)
                .ok_or_else(|| Error::InvalidPoint(format!("no component {}", p.component)))?;
            model.validate(&p.point)?;
        }
        Ok(self.distance_unchecked(x, y))
    }

    fn distance_unchecked(&self, x: &WedgePoint, y: &WedgePoint) -> f64 {
        let mut best = if x.component == y.component {
            self.components[x.component].distance_unchecked(x.point.coords(), y.point.coords())
        } else {
            f64::INFINITY
        };
        for j in 0..self.sites.len() {
            let lx = self.leg(x, j);
            if !lx.is_finite() {
                continue;
            }
            for k in 0..self.sites.len() {
                let ly = self.leg(y, k);
                if ly.is_finite() {
                    best = best.min(lx + self.site_dist[j][k] + ly);
                }
            }
        }
        best
    }
}

impl NetSource for WedgeSpace {
    type Point = WedgePoint;

    fn distance(&self, a: &WedgePoint, b: &WedgePoint) -> Result<f64> {
        Ok(self.distance_unchecked(a, b))
    }

    fn random_candidate(&self, center: &WedgePoint, radius: f64, rng: &mut dyn RngCore) -> Result<WedgePoint> {
        // Balls around the center and around every junction point.
        let anchors = self.sites.len() + 1;
        let pick = rng.gen_range(0..anchors);
        let base = if pick == 0 { center } else { &self.sites[pick - 1] };
        let model = &self.components[base.component];
        let t = radius * rng.gen::<f64>().sqrt();
        let v = model.direction(&base.point, rng.gen_range(0.0..2.0 * PI))?;
        Ok(WedgePoint {
            component: base.component,
            point: model.exp_map(&base.point, &v, t)?,
        })
    }

    fn lattice(&self, center: &WedgePoint, radius: f64, spacing: f64) -> Result<Vec<WedgePoint>> {
        // A shortest path from the center enters each component through a
        // junction point, so polar lattices around those cover the ball.
        let mut out = Vec::new();
        for base in std::iter::once(center).chain(self.sites.iter()) {
            let model = &self.components[base.component];
            let reach = model.diameter().map_or(radius, |d| radius.min(d));
            for (t, phi) in polar_lattice(model.curvature(), reach, spacing) {
                let v = model.direction(&base.point, phi)?;
                let p = WedgePoint {
                    component: base.component,
                    point: model.exp_map(&base.point, &v, t)?,
                };
                if self.distance_unchecked(center, &p) <= radius {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    fn chart(&self, p: &WedgePoint) -> [f64; 2] {
        let (t, phi) = self.components[p.component].polar_coords(&p.point);
        [t * phi.cos() + 1.0e3 * p.component as f64, t * phi.sin()]
    }

    fn provenance(&self, p: &WedgePoint) -> Provenance {
        Provenance {
            source: format!("wedge component {}", p.component + 1),
            coords: p.point.coords().to_vec(),
        }
    }
}

/// One row of [`ricci_violation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciRow {
    pub r: f64,
    /// `(V(n,H,3r) - V(n,H,r)) / V(n,H,r)`.
    pub lhs: f64,
    /// `(V(n,K1,3r) - V(n,K1,r) + V(n,K2,r)) / V(n,K1,r)`.
    pub rhs: f64,
    pub violated: bool,
}

/// Volume comparison on an annulus around a junction of two space forms.
///
/// Relative volume comparison with lower curvature bound `H` caps the
/// annulus ratio by `lhs`, while the wedge itself has ratio at least `rhs`.
/// As `r -> 0` these tend to `3^n - 1` and `3^n`, so the comparison fails.
pub fn ricci_violation(n: usize, k1: f64, k2: f64, h: f64, radii: &[f64]) -> Result<Vec<RicciRow>> {
    if h > k1.min(k2) {
        return Err(Error::domain(format!("H = {h} exceeds min(K1, K2) = {}", k1.min(k2))));
    }
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::domain(format!("radius {r} must be positive")));
            }
            let vh = |x: f64| ball_volume(n, h, x);
            let v1 = |x: f64| ball_volume(n, k1, x);
            let lhs = (vh(3.0 * r)? - vh(r)?) / vh(r)?;
            let rhs = (v1(3.0 * r)? - v1(r)? + ball_volume(n, k2, r)?) / v1(r)?;
            Ok(RicciRow {
                r,
                lhs,
                rhs,
                violated: lhs < rhs,
            })
        })
        .collect()
}

/// Settings shared by the convergence experiment rows.
#[derive(Clone, Debug)]
pub struct ConvergenceSettings {
    pub k1: f64,
    pub k2: f64,
    pub radii: Vec<f64>,
    /// Radius of the compared balls.
    pub ball_radius: f64,
    pub net_spacing: f64,
    /// Angle passed to the gluing preconditions.
    pub epsilon_target: f64,
    pub seed: u64,
    pub effort: usize,
}

impl ConvergenceSettings {
    pub fn flat(radii: Vec<f64>) -> Self {
        Self {
            k1: 0.0,
            k2: 0.0,
            radii,
            ball_radius: 1.0,
            net_spacing: 0.05,
            epsilon_target: 0.5,
            seed: 0,
            effort: 6,
        }
    }
}

/// One row of [`convergence_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub r: f64,
    pub samples_x: usize,
    pub samples_y: usize,
    pub gh_upper: f64,
    pub gh_lower: f64,
    pub neck_diameter: f64,
    /// Net spacing plus neck diameter.
    pub budget: f64,
    /// Build or sampling failure for this radius.
    pub error: Option<String>,
}

/// Compares the ball of radius `D` about the throat of `M_r` with the ball
/// of radius `D` about the junction of the wedge, for each `r`.
pub fn convergence_experiment(settings: &ConvergenceSettings) -> Result<Vec<ConvergenceRow>> {
    if settings.radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("radius schedule must be strictly decreasing"));
    }
    let wedge = WedgeSpace::pair(settings.k1, settings.k2)?;
    let hub = wedge.sites()[0].clone();
    let options = NetOptions::seeded(settings.seed);
    let y_points = epsilon_net_points(&wedge, &hub, settings.ball_radius, settings.net_spacing, options)?;
    let y = wedge_sample(&wedge, &y_points)?;
    let mut rows = Vec::new();
    for &r in &settings.radii {
        let row = match build_glued(settings.k1, settings.k2, r, settings.epsilon_target) {
            Ok(g) => convergence_row(settings, &g, &wedge, &y_points, &y)?,
            Err(e @ (Error::Precondition(_) | Error::Domain(_))) => ConvergenceRow {
                r,
                samples_x: 0,
                samples_y: y.len(),
                gh_upper: f64::NAN,
                gh_lower: f64::NAN,
                neck_diameter: f64::NAN,
                budget: f64::NAN,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

fn wedge_sample(wedge: &WedgeSpace, points: &[WedgePoint]) -> Result<FiniteMetricSpace> {
    let labels = points
        .iter()
        .enumerate()
        .map(|(i, p)| Label::with_provenance(format!("y{i}"), wedge.provenance(p)))
        .collect();
    FiniteMetricSpace::from_fn(labels, |i, j| Ok(wedge.distance_unchecked(&points[i], &points[j])))
}

fn side_of(component: usize) -> Side {
    if component == 0 {
        Side::One
    } else {
        Side::Two
    }
}

fn convergence_row(
    settings: &ConvergenceSettings,
    g: &GluedManifold,
    wedge: &WedgeSpace,
    y_points: &[WedgePoint],
    y: &FiniteMetricSpace,
) -> Result<ConvergenceRow> {
    let p = g.throat_point(0.0);
    let options = NetOptions::seeded(settings.seed);
    let x_points = epsilon_net_points(g, &p, settings.ball_radius, settings.net_spacing, options)?;
    let labels = x_points
        .iter()
        .enumerate()
        .map(|(i, q)| Label::with_provenance(format!("x{i}"), g.provenance(q)))
        .collect();
    let x = FiniteMetricSpace::from_fn(labels, |i, j| Ok(g.distance(&x_points[i], &x_points[j])))?;

    let hint = natural_correspondence(g, wedge, &x_points, y_points)?;
    let gh = gh_upper(
        &x,
        y,
        &GhOptions {
            effort: settings.effort,
            seed: settings.seed,
            hints: vec![hint],
            ..GhOptions::default()
        },
    )?;
    let lower = gh_lower(&x, y);
    let neck = g.neck_diameter().value;
    Ok(ConvergenceRow {
        r: g.r(),
        samples_x: x.len(),
        samples_y: y.len(),
        gh_upper: gh.upper,
        gh_lower: lower,
        neck_diameter: neck,
        budget: settings.net_spacing + neck,
        error: None,
    })
}

/// The collapse map: exterior points keep their coordinates, neck points go
/// to the junction; each image is matched with its nearest sample.
fn natural_correspondence(
    g: &GluedManifold,
    wedge: &WedgeSpace,
    x_points: &[GluedPoint],
    y_points: &[WedgePoint],
) -> Result<Correspondence> {
    let hub = &wedge.sites()[0];
    let nearest_y = |target: &WedgePoint| -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, q) in y_points.iter().enumerate() {
            let d = wedge.distance_unchecked(target, q);
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1
    };
    let forward: Vec<usize> = x_points
        .iter()
        .map(|q| match (q.side(), q.exterior_point()) {
            (Some(side), Some(pt)) => nearest_y(&WedgePoint {
                component: side.index(),
                point: pt.clone(),
            }),
            _ => nearest_y(hub),
        })
        .collect();
    let throat = g.throat_point(0.0);
    let mut backward = Vec::with_capacity(y_points.len());
    for q in y_points {
        let (t, phi) = wedge.components()[q.component].polar_coords(&q.point);
        let image = if t >= g.r() {
            g.exterior(side_of(q.component), t, phi)?
        } else {
            throat.clone()
        };
        let mut best = (f64::INFINITY, 0);
        for (i, xp) in x_points.iter().enumerate() {
            let d = g.distance(&image, xp);
            if d < best.0 {
                best = (d, i);
            }
        }
        backward.push(best.1);
    }
    Correspondence::new(forward, backward)
}

/// One row of [`isotropy_convergence`].
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropyConvergenceRow {
    pub r: f64,
    /// Largest `|F_hat - F_K1|` over the grid, good directions only.
    pub max_deviation: f64,
    pub defect: f64,
    /// Measured radius of the cap of directions meeting the neck.
    pub cap_radius: f64,
    /// Angle `theta` with `F_K1(theta, d, d) = r`.
    pub expected_cap: f64,
    pub error: Option<String>,
}

/// Estimates the isotropy function on side 1 of `M_r` at distance `d` from
/// the excised center, over directions whose geodesic of length `d` avoids
/// the neck.
///
/// The radius grid stops at `d - max(r)` so every sampled endpoint pair is
/// joined inside the isometric exterior region.
pub fn isotropy_convergence(
    k1: f64,
    k2: f64,
    radii: &[f64],
    d: f64,
    epsilon_target: f64,
    n_dirs: usize,
) -> Result<Vec<IsotropyConvergenceRow>> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if !(d > r_max) {
        return Err(Error::domain(format!("base distance {d} must exceed every radius, max {r_max}")));
    }
    let grid = IsotropyGrid::standard(d - r_max);
    let mut rows = Vec::new();
    for &r in radii {
        let g = match build_glued(k1, k2, r, epsilon_target) {
            Ok(g) => g,
            Err(e @ (Error::Precondition(_) | Error::Domain(_))) => {
                rows.push(IsotropyConvergenceRow {
                    r,
                    max_deviation: f64::NAN,
                    defect: f64::NAN,
                    cap_radius: f64::NAN,
                    expected_cap: f64::NAN,
                    error: Some(e.to_string()),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let p = g.exterior(Side::One, d, 0.0)?;
        let bad = bad_directions(&g, &p, &Region::Neck, d, DIRECTION_COUNT)?;
        let cap_radius = match unseen_check(&bad, PI) {
            Ok(cover) => cover.caps.iter().map(|c| c.radius).fold(0.0, f64::max),
            Err(_) => PI,
        };
        let est = estimate_f(&g, &p, d - r_max, n_dirs, &grid, Some(&bad))?;
        let max_deviation = est.max_deviation(|th, s, t| law_of_cosines(k1, th, s, t))?;
        rows.push(IsotropyConvergenceRow {
            r,
            max_deviation,
            defect: est.defect(),
            cap_radius,
            expected_cap: invert_angle(k1, d, d, r)?,
            error: None,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn flat_pair() -> WedgeSpace {
        WedgeSpace::pair(0.0, 0.0).unwrap()
    }

    #[test]
    fn same_component_is_the_space_form() {
        let w = flat_pair();
        let a = w.point(0, vec![1.0, 2.0]).unwrap();
        let b = w.point(0, vec![-1.0, 0.5]).unwrap();
        assert!((w.distance(&a, &b).unwrap() - (4.0f64 + 2.25).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planes_meet_at_the_origin() {
        let w = flat_pair();
        let a = w.point(0, vec![3.0, 4.0]).unwrap();
        let b = w.point(1, vec![-1.0, 0.0]).unwrap();
        assert_eq!(w.distance(&a, &b).unwrap(), 6.0);
    }

    #[test]
    fn sphere_and_plane() {
        let s = SpaceFormParams::surface(1.0).unwrap();
        let p = SpaceFormParams::surface(0.0).unwrap();
        let j = s.polar(0.7, 0.3).unwrap();
        let w = WedgeSpace::new(
            vec![s.clone(), p.clone()],
            vec![Junction {
                a: (0, j.clone()),
                b: (1, p.point(vec![1.0, 1.0]).unwrap()),
            }],
            0.0,
        )
        .unwrap();
        let x = w.polar(0, 2.0, 2.0).unwrap();
        let y = w.point(1, vec![-2.0, 3.0]).unwrap();
        let expected = s.distance(&x.point, &j).unwrap() + (9.0f64 + 4.0).sqrt();
        assert!((w.distance(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_close_junctions_and_disconnection() {
        let p = SpaceFormParams::surface(0.0).unwrap();
        let js = vec![
            Junction { a: (0, p.origin()), b: (1, p.origin()) },
            Junction { a: (0, p.point(vec![0.5, 0.0]).unwrap()), b: (2, p.origin()) },
        ];
        let three = vec![p.clone(), p.clone(), p.clone()];
        assert!(matches!(WedgeSpace::new(three.clone(), js.clone(), 0.3), Err(Error::Precondition(_))));
        assert!(WedgeSpace::new(three.clone(), js, 0.2).is_ok());
        let one = vec![Junction { a: (0, p.origin()), b: (1, p.origin()) }];
        assert!(matches!(WedgeSpace::new(three, one, 0.0), Err(Error::Disconnected(_))));
    }

    /// Best route through explicit sequences of distinct junction crossings.
    fn enumerate(w: &WedgeSpace, x: &WedgePoint, y: &WedgePoint) -> f64 {
        fn walk(w: &WedgeSpace, at: &WedgePoint, y: &WedgePoint, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if at.component == y.component {
                let d = w.components[at.component].distance_unchecked(at.point.coords(), y.point.coords());
                *best = best.min(acc + d);
            }
            for (i, j) in w.junctions.iter().enumerate() {
                if used[i] {
                    continue;
                }
                for (from, to) in [(&j.a, &j.b), (&j.b, &j.a)] {
                    if from.0 != at.component {
                        continue;
                    }
                    let leg = w.components[at.component].distance_unchecked(at.point.coords(), from.1.coords());
                    used[i] = true;
                    let next = WedgePoint {
                        component: to.0,
                        point: to.1.clone(),
                    };
                    walk(w, &next, y, used, acc + leg, best);
                    used[i] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        walk(w, x, y, &mut vec![false; w.junctions.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn junction_graph_matches_enumeration() {
        let models: Vec<_> = [0.0, -1.0, 1.0, 0.0]
            .iter()
            .map(|&k| SpaceFormParams::surface(k).unwrap())
            .collect();
        let p = |c: usize, t: f64, phi: f64| (c, models[c].polar(t, phi).unwrap());
        let junctions = vec![
            Junction { a: p(0, 0.0, 0.0), b: p(1, 0.0, 0.0) },
            Junction { a: p(0, 2.0, 1.0), b: p(2, 0.5, 0.0) },
            Junction { a: p(1, 1.5, 2.0), b: p(2, 1.2, 3.0) },
            Junction { a: p(2, 0.5, 0.0), b: p(3, 0.0, 0.0) },
            Junction { a: p(1, 1.0, 4.0), b: p(3, 3.0, 1.0) },
        ];
        let w = WedgeSpace::new(models.clone(), junctions, 0.1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let c1 = rng.gen_range(0..4);
            let c2 = rng.gen_range(0..4);
            let x = w.polar(c1, rng.gen_range(0.0..2.5), rng.gen_range(0.0..6.3)).unwrap();
            let y = w.polar(c2, rng.gen_range(0.0..2.5), rng.gen_range(0.0..6.3)).unwrap();
            let d = w.distance(&x, &y).unwrap();
            let e = enumerate(&w, &x, &y);
            assert!((d - e).abs() < 1e-12, "{d} vs {e}");
        }
    }

    #[test]
    fn wedge_net_stays_in_ball() {
        let w = flat_pair();
        let c = w.sites()[0].clone();
        let pts = epsilon_net_points(&w, &c, 0.6, 0.15, NetOptions::seeded(2)).unwrap();
        assert!(pts.iter().any(|p| p.component == 1) && pts.iter().any(|p| p.component == 0));
        for p in &pts {
            assert!(w.distance(&c, p).unwrap() <= 0.6 + 1e-12);
        }
    }

    #[test]
    fn convergence_rows_shrink() {
        let mut s = ConvergenceSettings::flat(vec![0.1, 0.05]);
        s.ball_radius = 0.5;
        s.net_spacing = 0.1;
        s.effort = 2;
        let rows = convergence_experiment(&s).unwrap();
        for row in &rows {
            assert!(row.error.is_none());
            assert!(row.gh_lower <= row.gh_upper + 1e-12);
            assert!(row.gh_upper <= row.budget, "{row:?}");
        }
    }

    #[test]
    fn flat_isotropy_rows() {
        let rows = isotropy_convergence(0.0, 0.0, &[0.1, 0.05], 1.0, 0.5, 6).unwrap();
        for row in &rows {
            assert!(row.max_deviation < 1e-9, "{row:?}");
            assert!((row.cap_radius - row.expected_cap).abs() <= 2.0 * PI / 720.0, "{row:?}");
        }
    }

    #[test]
    fn flat_ricci_rows() {
        let rows = ricci_violation(2, 0.0, 0.0, 0.0, &[0.1, 1.0]).unwrap();
        for row in rows {
            assert!((row.lhs - 8.0).abs() < 1e-12 && (row.rhs - 9.0).abs() < 1e-12 && row.violated);
        }
        let rows = ricci_violation(3, 0.0, 0.0, 0.0, &[0.5]).unwrap();
        assert!((rows[0].lhs - 26.0).abs() < 1e-12 && (rows[0].rhs - 27.0).abs() < 1e-12);
        assert!(ricci_violation(2, 0.0, 0.0, 1.0, &[0.1]).is_err());
    }
}
