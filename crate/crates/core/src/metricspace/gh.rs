//! Gromov-Hausdorff distance bounds.
//!
//! Upper bounds are half the distortion of an explicit correspondence.
//! Lower bounds combine the diameter difference with packing counts: if
//! `R` has distortion `< eta` then any `s`-packing of `B(c, t)` in `X` maps
//! to an `(s - eta/2)`-packing of a `(t + eta/2)`-ball in `Y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::packing::packing_number;
use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Both spaces at most this large get an exact search.
const EXACT_LIMIT: usize = 8;
const EXACT_NODE_BUDGET: u64 = 20_000_000;
/// Anchors consulted when seeding a map.
const ANCHORS: usize = 32;
/// Packing lower bounds are only attempted on spaces this small.
const PACKING_LOWER_LIMIT: usize = 80;

/// A correspondence given by maps `f: X -> Y` and `g: Y -> X`; the relation
/// is the union of both graphs, so it covers every point of both spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl Correspondence {
    pub fn new(forward: Vec<usize>, backward: Vec<usize>) -> Result<Self> {
        let (nx, ny) = (forward.len(), backward.len());
        if forward.iter().any(|&j| j >= ny) || backward.iter().any(|&i| i >= nx) {
            return Err(Error::domain("correspondence index out of range"));
        }
        Ok(Self { forward, backward })
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn backward(&self) -> &[usize] {
        &self.backward
    }

    /// Related index pairs `(i, j)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = self.forward.iter().enumerate().map(|(i, &j)| (i, j)).collect();
        p.extend(self.backward.iter().enumerate().map(|(j, &i)| (i, j)));
        p.sort_unstable();
        p.dedup();
        p
    }

    fn check_shape(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<()> {
        if self.forward.len() != x.len() || self.backward.len() != y.len() {
            return Err(Error::domain(format!(
                "correspondence is {}x{}, spaces are {}x{}",
                self.forward.len(),
                self.backward.len(),
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    /// `max |d_X(x, x') - d_Y(y, y')|` over related pairs.
    pub fn distortion(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
        self.check_shape(x, y)?;
        Ok(worst(&row_maxima(&self.pairs(), x, y)).1)
    }
}

fn row_maxima(pairs: &[(usize, usize)], x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Vec<f64> {
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let (rx, ry) = (x.row(a), y.row(b));
            pairs
                .iter()
                .map(|&(c, d)| (rx[c] - ry[d]).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

fn worst(rows: &[f64]) -> (usize, f64) {
    rows.iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
}

#[derive(Clone, Debug)]
pub struct GhOptions {
    /// Local improvement moves per restart.
    pub effort: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Extra starting correspondences, e.g. built from known coordinates.
    pub hints: Vec<Correspondence>,
}

impl Default for GhOptions {
    fn default() -> Self {
        Self {
            effort: 40,
            restarts: 8,
            seed: 0,
            hints: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GhEstimate {
    /// Half the distortion of `correspondence`.
    pub upper: f64,
    pub correspondence: Correspondence,
    /// Whether the correspondence is optimal.
    pub exact: bool,
}

/// Upper bound on the Gromov-Hausdorff distance: half the distortion of the
/// best correspondence found. Deterministic for a given seed.
pub fn gh_upper(x: &FiniteMetricSpace, y: &FiniteMetricSpace, options: &GhOptions) -> Result<GhEstimate> {
    for h in &options.hints {
        h.check_shape(x, y)?;
    }
    if x.len() == 1 || y.len() == 1 {
        let c = Correspondence::new(vec![0; x.len()], vec![0; y.len()])?;
        let upper = 0.5 * c.distortion(x, y)?;
        return Ok(GhEstimate {
            upper,
            correspondence: c,
            exact: true,
        });
    }
    let restarts = options.restarts.max(1);
    let mut starts: Vec<Correspondence> = (0..restarts)
        .into_par_iter()
        .map(|r| greedy_seed(x, y, options.seed, r))
        .collect();
    starts.extend(options.hints.iter().cloned());
    let results: Vec<(f64, Correspondence)> = starts
        .into_par_iter()
        .map(|c| improve(x, y, c, options.effort))
        .collect();
    let (mut best_dis, mut best) = results
        .into_iter()
        .fold(None, |acc: Option<(f64, Correspondence)>, (d, c)| match acc {
            Some((bd, bc)) if bd <= d => Some((bd, bc)),
            _ => Some((d, c)),
        })
        .expect("at least one restart");
    let mut exact = false;
    if x.len() <= EXACT_LIMIT && y.len() <= EXACT_LIMIT {
        if let Some((d, c)) = exact_search(x, y, best_dis) {
            if d < best_dis {
                best_dis = d;
                best = c;
            }
            exact = true;
        }
    }
    Ok(GhEstimate {
        upper: 0.5 * best_dis,
        correspondence: best,
        exact,
    })
}

/// Quantile profile of a distance row, used to pair up the first points.
fn profile(row: &[f64]) -> Vec<f64> {
    let mut v = row.to_vec();
    v.sort_by(f64::total_cmp);
    (0..=16).map(|q| v[(q * (v.len() - 1)) / 16]).collect()
}

fn profile_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Farthest-point order starting at `start`.
fn farthest_order(x: &FiniteMetricSpace, start: usize) -> Vec<usize> {
    let n = x.len();
    let mut order = vec![start];
    let mut gap: Vec<f64> = x.row(start).to_vec();
    let mut used = vec![false; n];
    used[start] = true;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&i| !used[i])
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(j) if gap[j] >= gap[i] => Some(j),
                _ => Some(i),
            })
            .expect("unused point remains");
        used[next] = true;
        order.push(next);
        for (g, &d) in gap.iter_mut().zip(x.row(next)) {
            *g = g.min(d);
        }
    }
    order
}

/// Greedy correspondence: points of `X` in farthest-point order are sent to
/// the point of `Y` that best matches their distances to earlier anchors,
/// then `Y` is mapped back against the same anchors.
fn greedy_seed(x: &FiniteMetricSpace, y: &FiniteMetricSpace, seed: u64, restart: usize) -> Correspondence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let x0 = if restart == 0 { 0 } else { rng.gen_range(0..x.len()) };
    let px = profile(x.row(x0));
    let mut ranked: Vec<(f64, usize)> = (0..y.len()).map(|j| (profile_gap(&px, &profile(y.row(j))), j)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let y0 = ranked[(restart % 3).min(ranked.len() - 1)].1;

    let order = farthest_order(x, x0);
    let mut forward = vec![usize::MAX; x.len()];
    forward[x0] = y0;
    let mut anchors = vec![x0];
    for &i in &order[1..] {
        let j = best_match(|a| x.dist(i, a), |a, b| y.dist(b, forward[a]), &anchors, y.len());
        forward[i] = j;
        if anchors.len() < ANCHORS {
            anchors.push(i);
        }
    }
    let backward: Vec<usize> = (0..y.len())
        .map(|j| best_match(|a| y.dist(j, forward[a]), |a, b| x.dist(b, a), &anchors, x.len()))
        .collect();
    Correspondence { forward, backward }
}

/// The candidate `b` minimising `max_a |target(a) - candidate(a, b)|`.
fn best_match<T, C>(target: T, candidate: C, anchors: &[usize], n: usize) -> usize
where
    T: Fn(usize) -> f64,
    C: Fn(usize, usize) -> f64,
{
    let wanted: Vec<f64> = anchors.iter().map(|&a| target(a)).collect();
    let mut best = (f64::INFINITY, 0);
    for b in 0..n {
        let mut m = 0.0f64;
        for (k, &a) in anchors.iter().enumerate() {
            m = m.max((wanted[k] - candidate(a, b)).abs());
            if m >= best.0 {
                break;
            }
        }
        if m < best.0 {
            best = (m, b);
        }
    }
    best.1
}

/// Repeatedly re-targets an endpoint of the worst related pair.
fn improve(x: &FiniteMetricSpace, y: &FiniteMetricSpace, mut c: Correspondence, effort: usize) -> (f64, Correspondence) {
    let nx = x.len();
    let all_pairs = |c: &Correspondence| -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> = c.forward.iter().enumerate().map(|(i, &j)| (i, j)).collect();
        p.extend(c.backward.iter().enumerate().map(|(j, &i)| (i, j)));
        p
    };
    let mut pairs = all_pairs(&c);
    let mut rows = row_maxima(&pairs, x, y);
    let (_, mut dis) = worst(&rows);
    for _ in 0..effort {
        // Entries whose row attains the distortion, worst first.
        let mut culprits: Vec<usize> = (0..pairs.len()).filter(|&k| rows[k] >= dis).collect();
        culprits.truncate(4);
        let mut moved = false;
        for k in culprits {
            let others: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|&(q, _)| q != k).map(|(_, &p)| p).collect();
            let (cost, choice) = if k < nx {
                let i = pairs[k].0;
                (0..y.len())
                    .map(|j| (others.iter().map(|&(a, b)| (x.dist(i, a) - y.dist(j, b)).abs()).fold(0.0, f64::max), j))
                    .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
            } else {
                let j = pairs[k].1;
                (0..nx)
                    .map(|i| (others.iter().map(|&(a, b)| (x.dist(i, a) - y.dist(j, b)).abs()).fold(0.0, f64::max), i))
                    .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
            };
            if cost < dis {
                if k < nx {
                    c.forward[k] = choice;
                } else {
                    c.backward[k - nx] = choice;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
        pairs = all_pairs(&c);
        rows = row_maxima(&pairs, x, y);
        let (_, d) = worst(&rows);
        if d >= dis {
            break;
        }
        dis = d;
    }
    (dis, c)
}

/// Depth-first search over all map pairs with distortion pruning. Returns
/// `None` when the node budget runs out.
fn exact_search(x: &FiniteMetricSpace, y: &FiniteMetricSpace, incumbent: f64) -> Option<(f64, Correspondence)> {
    struct Search<'a> {
        x: &'a FiniteMetricSpace,
        y: &'a FiniteMetricSpace,
        pairs: Vec<(usize, usize)>,
        best: f64,
        best_pairs: Option<Vec<(usize, usize)>>,
        nodes: u64,
    }
    impl Search<'_> {
        fn go(&mut self, depth: usize, current: f64) -> bool {
            self.nodes += 1;
            if self.nodes > EXACT_NODE_BUDGET {
                return false;
            }
            let (nx, ny) = (self.x.len(), self.y.len());
            if depth == nx + ny {
                if current < self.best || self.best_pairs.is_none() {
                    self.best = current;
                    self.best_pairs = Some(self.pairs.clone());
                }
                return true;
            }
            let options = if depth < nx { ny } else { nx };
            for o in 0..options {
                let pair = if depth < nx { (depth, o) } else { (o, depth - nx) };
                let mut m = current;
                for &(a, b) in &self.pairs {
                    m = m.max((self.x.dist(pair.0, a) - self.y.dist(pair.1, b)).abs());
                }
                if m >= self.best && self.best_pairs.is_some() {
                    continue;
                }
                if self.best_pairs.is_none() && m > self.best {
                    continue;
                }
                self.pairs.push(pair);
                let ok = self.go(depth + 1, m);
                self.pairs.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }
    let mut s = Search {
        x,
        y,
        pairs: Vec::new(),
        best: incumbent,
        best_pairs: None,
        nodes: 0,
    };
    if !s.go(0, 0.0) {
        return None;
    }
    // Nothing strictly better than the incumbent exists.
    let pairs = s.best_pairs?;
    let nx = x.len();
    let forward = pairs[..nx].iter().map(|p| p.1).collect();
    let backward = pairs[nx..].iter().map(|p| p.0).collect();
    Some((s.best, Correspondence { forward, backward }))
}

/// Lower bound on the Gromov-Hausdorff distance.
pub fn gh_lower(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let mut lb = 0.5 * (x.diameter() - y.diameter()).abs();
    if x.len() <= PACKING_LOWER_LIMIT && y.len() <= PACKING_LOWER_LIMIT {
        lb = lb.max(packing_lower(x, y)).max(packing_lower(y, x));
    }
    lb
}

fn quantiles(x: &FiniteMetricSpace, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..x.len()).flat_map(|i| (i + 1..x.len()).map(move |j| (i, j))).map(|(i, j)| x.dist(i, j)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.is_empty() {
        return v;
    }
    let mut q: Vec<f64> = (0..count).map(|k| v[(k * (v.len() - 1)) / (count - 1).max(1)]).collect();
    q.dedup();
    q
}

/// Largest `eta / 2` certified by a packing mismatch from `X` to `Y`.
fn packing_lower(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let dists = quantiles(x, 8);
    let mut best = 0.0f64;
    for &gap in &dists {
        // Separation just below an observed distance, so pairs at that
        // distance count as disjoint.
        let s = 0.5 * gap * (1.0 - 1e-9);
        for &reach in &dists {
            let t = s + reach;
            let px = (0..x.len()).map(|c| packing_number(x, s, t, c).lower()).max().unwrap_or(0);
            let py = |eta: f64| {
                (0..y.len())
                    .map(|c| packing_number(y, s - 0.5 * eta, t + 0.5 * eta, c).upper())
                    .max()
                    .unwrap_or(0)
            };
            if py(0.0) >= px {
                continue;
            }
            let (mut lo, mut hi) = (0.0, 2.0 * s);
            if py(hi * (1.0 - 1e-12)) < px {
                lo = hi * (1.0 - 1e-12);
            } else {
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if py(mid) < px {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            best = best.max(0.5 * lo);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{epsilon_net_sample, NetOptions};
    use crate::spaceform::SpaceFormParams;

    fn random_planar(n: usize, seed: u64) -> FiniteMetricSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)]).collect();
        FiniteMetricSpace::from_planar(&pts).unwrap()
    }

    #[test]
    fn relabeled_copy_is_close() {
        let x = random_planar(30, 1);
        let mut perm: Vec<usize> = (0..30).collect();
        perm.reverse();
        perm.swap(3, 17);
        let y = x.permuted(&perm).unwrap();
        let est = gh_upper(&x, &y, &GhOptions::default()).unwrap();
        assert!(est.upper <= 1e-6, "{}", est.upper);
    }

    #[test]
    fn single_point_gives_half_diameter() {
        let x = FiniteMetricSpace::from_planar(&[[0.0, 0.0]]).unwrap();
        let y = random_planar(12, 2);
        let est = gh_upper(&x, &y, &GhOptions::default()).unwrap();
        assert_eq!(est.upper, 0.5 * y.diameter());
        assert_eq!(gh_upper(&y, &x, &GhOptions::default()).unwrap().upper, 0.5 * y.diameter());
    }

    #[test]
    fn exact_search_on_small_spaces() {
        let x = FiniteMetricSpace::from_planar(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = FiniteMetricSpace::from_planar(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let est = gh_upper(&x, &y, &GhOptions::default()).unwrap();
        assert!(est.exact);
        // Brute force over all map pairs.
        let mut best = f64::INFINITY;
        for f in 0..8usize {
            for g in 0..9usize {
                let c = Correspondence::new(
                    vec![f & 1, (f >> 1) & 1, (f >> 2) & 1],
                    vec![g % 3, g / 3],
                )
                .unwrap();
                best = best.min(c.distortion(&x, &y).unwrap());
            }
        }
        assert!((est.upper - 0.5 * best).abs() < 1e-15);
    }

    #[test]
    fn nets_of_one_disk() {
        let plane = SpaceFormParams::surface(0.0).unwrap();
        let o = plane.origin();
        let coarse = epsilon_net_sample(&plane, &o, 1.0, 0.2, NetOptions::seeded(1)).unwrap();
        let fine = epsilon_net_sample(&plane, &o, 1.0, 0.1, NetOptions::seeded(2)).unwrap();
        let est = gh_upper(&coarse, &fine, &GhOptions::default()).unwrap();
        assert!(est.upper <= 0.31, "{}", est.upper);
        assert!(gh_lower(&coarse, &fine) <= est.upper);
    }

    #[test]
    fn lower_bounds() {
        let x = random_planar(10, 4);
        assert_eq!(gh_lower(&x, &x), 0.0);
        let a = FiniteMetricSpace::from_planar(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let b = FiniteMetricSpace::from_planar(&[[0.0, 0.0], [3.0, 0.0]]).unwrap();
        assert!(gh_lower(&a, &b) >= 0.5);
    }

    #[test]
    fn segment_versus_tripod() {
        // Both have diameter 2; the tripod holds three far-apart endpoints.
        let seg = FiniteMetricSpace::from_planar(&(0..9).map(|i| [i as f64 * 0.25, 0.0]).collect::<Vec<_>>()).unwrap();
        let mut labels = Vec::new();
        let mut arm_pos = vec![(0usize, 0.0f64)];
        for arm in 0..3 {
            for k in 1..=4 {
                arm_pos.push((arm, k as f64 * 0.25));
            }
        }
        for i in 0..arm_pos.len() {
            labels.push(crate::metricspace::Label::new(format!("v{i}")));
        }
        let tripod = FiniteMetricSpace::from_fn(labels, |i, j| {
            let (a, s) = arm_pos[i];
            let (b, t) = arm_pos[j];
            Ok(if a == b || s == 0.0 || t == 0.0 { (s - t).abs() } else { s + t })
        })
        .unwrap();
        assert_eq!(seg.diameter(), tripod.diameter());
        let lb = gh_lower(&seg, &tripod);
        let ub = gh_upper(&seg, &tripod, &GhOptions::default()).unwrap().upper;
        assert!(lb > 0.0 && lb <= ub, "{lb} {ub}");
    }
}
