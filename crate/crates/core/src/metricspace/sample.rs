//! Seeded Poisson-disk nets of metric balls.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FiniteMetricSpace, Label, Provenance};
use crate::error::{Error, Result};
use crate::spaceform::{sn, SpaceFormParams, SpaceFormPoint};

/// A space that can be sampled into a net.
pub trait NetSource: Sync {
    type Point: Clone + Send + Sync;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// A random point near the ball `B(center, radius)`; points outside the
    /// ball are discarded by the caller.
    fn random_candidate(&self, center: &Self::Point, radius: f64, rng: &mut dyn RngCore) -> Result<Self::Point>;

    /// Points of `B(center, radius)` such that every point of the ball is
    /// within `spacing` of one of them.
    fn lattice(&self, center: &Self::Point, radius: f64, spacing: f64) -> Result<Vec<Self::Point>>;

    /// Planar chart used only to order nearby candidates; distances never
    /// depend on it.
    fn chart(&self, p: &Self::Point) -> [f64; 2];

    fn provenance(&self, p: &Self::Point) -> Provenance;
}

#[derive(Clone, Copy, Debug)]
pub struct NetOptions {
    pub seed: u64,
    /// Consecutive rejected candidates that end the random phase.
    pub max_failures: usize,
    /// Minimum separation as a fraction of the net spacing.
    pub separation: f64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_failures: 60,
            separation: 0.8,
        }
    }
}

impl NetOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Accepted samples bucketed by chart cell.
struct Net<'a, S: NetSource> {
    source: &'a S,
    points: Vec<S::Point>,
    cells: HashMap<(i64, i64), Vec<usize>>,
    cell: f64,
    threshold: f64,
}

impl<'a, S: NetSource> Net<'a, S> {
    fn key(&self, p: &S::Point) -> (i64, i64) {
        let [x, y] = self.source.chart(p);
        ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64)
    }

    /// Whether some accepted point lies within the threshold. Chart
    /// neighbours are tried first, then everything.
    fn covered(&self, p: &S::Point) -> Result<bool> {
        let (cx, cy) = self.key(p);
        let mut tried = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &i in ids {
                        if self.source.distance(p, &self.points[i])? <= self.threshold {
                            return Ok(true);
                        }
                        tried.push(i);
                    }
                }
            }
        }
        tried.sort_unstable();
        for (i, q) in self.points.iter().enumerate() {
            if tried.binary_search(&i).is_ok() {
                continue;
            }
            if self.source.distance(p, q)? <= self.threshold {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn offer(&mut self, p: S::Point) -> Result<bool> {
        if self.covered(&p)? {
            return Ok(false);
        }
        let key = self.key(&p);
        self.cells.entry(key).or_default().push(self.points.len());
        self.points.push(p);
        Ok(true)
    }
}

/// Points of a net of `B(center, radius)`: pairwise more than
/// `separation * spacing` apart and covering the ball within `spacing`.
pub fn epsilon_net_points<S: NetSource>(
    source: &S,
    center: &S::Point,
    radius: f64,
    spacing: f64,
    options: NetOptions,
) -> Result<Vec<S::Point>> {
    if !(spacing > 0.0) || !(radius >= 0.0) {
        return Err(Error::domain(format!("need radius >= 0 and spacing > 0, got {radius}, {spacing}")));
    }
    if !(options.separation >= 0.5 && options.separation < 0.95) {
        return Err(Error::domain("separation must lie in [0.5, 0.95)"));
    }
    let mut net = Net {
        source,
        points: vec![center.clone()],
        cells: HashMap::new(),
        cell: spacing,
        threshold: options.separation * spacing,
    };
    let key = net.key(center);
    net.cells.insert(key, vec![0]);
    if radius < spacing {
        return Ok(net.points);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut failures = 0;
    while failures < options.max_failures {
        let p = source.random_candidate(center, radius, &mut rng)?;
        if source.distance(center, &p)? > radius {
            continue;
        }
        if net.offer(p)? {
            failures = 0;
        } else {
            failures += 1;
        }
    }
    // Fill sweep: every lattice point ends within the threshold of a sample,
    // so the ball is covered within threshold + lattice spacing < spacing.
    let fill = (1.0 - options.separation) * spacing * 0.999;
    for p in source.lattice(center, radius, fill)? {
        net.offer(p)?;
    }
    Ok(net.points)
}

/// Samples a net of `B(center, radius)` with spacing `spacing` as a finite
/// metric space. Labels carry the source coordinates.
pub fn epsilon_net_sample<S: NetSource>(
    source: &S,
    center: &S::Point,
    radius: f64,
    spacing: f64,
    options: NetOptions,
) -> Result<FiniteMetricSpace> {
    let points = epsilon_net_points(source, center, radius, spacing, options)?;
    let labels = points
        .iter()
        .enumerate()
        .map(|(i, p)| Label::with_provenance(format!("x{i}"), source.provenance(p)))
        .collect();
    FiniteMetricSpace::from_fn(labels, |i, j| source.distance(&points[i], &points[j]))
}

/// Largest value of `sn_K` on `[a, b]`.
pub(crate) fn sn_max(k: f64, a: f64, b: f64) -> f64 {
    let mut m = sn(k, a).max(sn(k, b));
    if k > 0.0 {
        let peak = 0.5 * PI / k.sqrt();
        if a <= peak && peak <= b {
            m = m.max(sn(k, peak));
        }
    }
    m
}

/// Geodesic polar lattice of `[0, radius]` with rings at most `0.9 spacing`
/// apart and arcs at most `0.9 spacing` long, as `(t, phi)` pairs.
pub fn polar_lattice(k: f64, radius: f64, spacing: f64) -> Vec<(f64, f64)> {
    let step = 0.9 * spacing;
    let rings = (radius / step).ceil().max(1.0) as usize;
    let dt = radius / rings as f64;
    let mut out = vec![(0.0, 0.0)];
    for j in 1..=rings {
        let t = dt * j as f64;
        let top = (t + 0.5 * dt).min(radius);
        let arc = sn_max(k, t - 0.5 * dt, top);
        let m = (2.0 * PI * arc / step).ceil().max(3.0) as usize;
        out.extend((0..m).map(|i| (t, 2.0 * PI * i as f64 / m as f64)));
    }
    out
}

impl NetSource for SpaceFormParams {
    type Point = SpaceFormPoint;

    fn distance(&self, a: &SpaceFormPoint, b: &SpaceFormPoint) -> Result<f64> {
        Ok(self.distance_unchecked(a.coords(), b.coords()))
    }

    fn random_candidate(&self, center: &SpaceFormPoint, radius: f64, rng: &mut dyn RngCore) -> Result<SpaceFormPoint> {
        let t = radius * rng.gen::<f64>().sqrt();
        let v = self.direction(center, rng.gen_range(0.0..2.0 * PI))?;
        self.exp_map(center, &v, t)
    }

    fn lattice(&self, center: &SpaceFormPoint, radius: f64, spacing: f64) -> Result<Vec<SpaceFormPoint>> {
        let r = match self.diameter() {
            Some(d) => radius.min(d),
            None => radius,
        };
        // Rings at distance below half a step plus arcs of 0.9 * spacing
        // keep every point within 0.45 + 0.45 spacing along the polar path.
        polar_lattice(self.curvature(), r, spacing)
            .into_iter()
            .map(|(t, phi)| {
                let v = self.direction(center, phi)?;
                self.exp_map(center, &v, t)
            })
            .collect()
    }

    fn chart(&self, p: &SpaceFormPoint) -> [f64; 2] {
        let (t, phi) = self.polar_coords(p);
        [t * phi.cos(), t * phi.sin()]
    }

    fn provenance(&self, p: &SpaceFormPoint) -> Provenance {
        Provenance {
            source: format!("spaceform(K={})", self.curvature()),
            coords: p.coords().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_net_counts_and_separation() {
        let plane = SpaceFormParams::surface(0.0).unwrap();
        let o = plane.origin();
        let pts = epsilon_net_points(&plane, &o, 1.0, 0.2, NetOptions::seeded(3)).unwrap();
        assert!((20..=120).contains(&pts.len()), "{}", pts.len());
        for (i, a) in pts.iter().enumerate() {
            assert!(plane.distance(&o, a).unwrap() <= 1.0 + 1e-12);
            for b in &pts[i + 1..] {
                assert!(plane.distance(a, b).unwrap() >= 0.1);
            }
        }
    }

    #[test]
    fn net_covers_random_probes() {
        for k in [0.0, 1.0, -1.0] {
            let m = SpaceFormParams::surface(k).unwrap();
            let o = m.origin();
            let pts = epsilon_net_points(&m, &o, 1.0, 0.2, NetOptions::seeded(5)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut probes = 0;
            while probes < 1000 {
                // Rejection sampling from the bounding polar box.
                let p = m.polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
                if m.distance(&o, &p).unwrap() > 1.0 {
                    continue;
                }
                probes += 1;
                let gap = pts.iter().map(|q| m.distance(&p, q).unwrap()).fold(f64::INFINITY, f64::min);
                assert!(gap < 0.2, "K={k}: probe {:?} is {gap} from the net", p.coords());
            }
        }
    }

    #[test]
    fn tiny_ball_gives_one_point() {
        let plane = SpaceFormParams::surface(0.0).unwrap();
        let x = epsilon_net_sample(&plane, &plane.origin(), 0.1, 0.2, NetOptions::default()).unwrap();
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = SpaceFormParams::surface(-1.0).unwrap();
        let a = epsilon_net_sample(&m, &m.origin(), 1.0, 0.25, NetOptions::seeded(8)).unwrap();
        let b = epsilon_net_sample(&m, &m.origin(), 1.0, 0.25, NetOptions::seeded(8)).unwrap();
        assert_eq!(a, b);
    }
}
