//! Disjoint-ball packing counts.

use super::FiniteMetricSpace;
use crate::error::Result;
use crate::spaceform::ball_volume;

/// Candidate sets up to this size are solved exactly.
const EXACT_LIMIT: usize = 25;

/// Number of disjoint `s`-balls centred at sample points inside a `t`-ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackingCount {
    Exact(usize),
    /// The optimum lies in `[lower, upper]`; `lower` is realised by an
    /// explicit packing and `upper` by a clique cover.
    Bounds { lower: usize, upper: usize },
}

impl PackingCount {
    pub fn lower(self) -> usize {
        match self {
            PackingCount::Exact(n) => n,
            PackingCount::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(self) -> usize {
        match self {
            PackingCount::Exact(n) => n,
            PackingCount::Bounds { upper, .. } => upper,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, PackingCount::Exact(_))
    }
}

/// Maximum number of points within `t - s` of `center` that are pairwise
/// more than `2s` apart, so that their `s`-balls are disjoint and inside
/// `B(center, t)`. For `s >= t` the center's own ball is the answer: 1.
pub fn packing_number(x: &FiniteMetricSpace, s: f64, t: f64, center: usize) -> PackingCount {
    if s >= t {
        return PackingCount::Exact(1);
    }
    let reach = t - s;
    let candidates: Vec<usize> = (0..x.len()).filter(|&i| x.dist(center, i) <= reach).collect();
    let sep = 2.0 * s;
    let compatible = |a: usize, b: usize| x.dist(candidates[a], candidates[b]) > sep;
    let m = candidates.len();
    if m <= EXACT_LIMIT {
        let adj: Vec<u32> = (0..m)
            .map(|a| (0..m).filter(|&b| b != a && compatible(a, b)).fold(0u32, |acc, b| acc | (1 << b)))
            .collect();
        let all = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        return PackingCount::Exact(max_packing_exact(&adj, all));
    }
    let lower = greedy_packing(x, &candidates, sep);
    let upper = clique_cover(x, &candidates, sep).max(lower);
    if lower == upper {
        PackingCount::Exact(lower)
    } else {
        PackingCount::Bounds { lower, upper }
    }
}

/// Branch and bound for the largest set of mutually compatible vertices;
/// `adj[v]` holds the vertices compatible with `v`.
fn max_packing_exact(adj: &[u32], candidates: u32) -> usize {
    fn go(adj: &[u32], cand: u32, size: usize, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let rest = cand & !(1 << v);
        go(adj, rest & adj[v], size + 1, best);
        go(adj, rest, size, best);
    }
    let mut best = 0;
    go(adj, candidates, 0, &mut best);
    best
}

/// Best of a few greedy orders: by distance from the first candidate outward
/// and by fewest conflicts first.
fn greedy_packing(x: &FiniteMetricSpace, candidates: &[usize], sep: f64) -> usize {
    let conflicts: Vec<usize> = candidates
        .iter()
        .map(|&a| candidates.iter().filter(|&&b| x.dist(a, b) <= sep).count())
        .collect();
    let mut by_conflict: Vec<usize> = (0..candidates.len()).collect();
    by_conflict.sort_by_key(|&i| (conflicts[i], i));
    let by_index: Vec<usize> = (0..candidates.len()).collect();
    [by_conflict, by_index]
        .iter()
        .map(|order| {
            let mut chosen: Vec<usize> = Vec::new();
            for &i in order {
                let c = candidates[i];
                if chosen.iter().all(|&d| x.dist(c, d) > sep) {
                    chosen.push(c);
                }
            }
            chosen.len()
        })
        .max()
        .unwrap_or(0)
}

/// Greedy partition into groups of pairwise conflicting points; a packing
/// uses at most one point per group.
fn clique_cover(x: &FiniteMetricSpace, candidates: &[usize], sep: f64) -> usize {
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for &c in candidates {
        match cliques.iter_mut().find(|q| q.iter().all(|&d| x.dist(c, d) <= sep)) {
            Some(q) => q.push(c),
            None => cliques.push(vec![c]),
        }
    }
    cliques.len()
}

/// `V(n, H, t) / V(n, H, s)`: on a space of constant curvature `H` no more
/// than this many disjoint `s`-balls fit in a `t`-ball.
pub fn bishop_gromov_ceiling(n: usize, h: f64, s: f64, t: f64) -> Result<f64> {
    Ok(ball_volume(n, h, t)? / ball_volume(n, h, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(x: &FiniteMetricSpace, s: f64, t: f64, center: usize) -> usize {
        let cand: Vec<usize> = (0..x.len()).filter(|&i| x.dist(center, i) <= t - s).collect();
        let mut best = 0;
        for mask in 0u32..(1 << cand.len()) {
            let set: Vec<usize> = (0..cand.len()).filter(|b| mask & (1 << b) != 0).map(|b| cand[b]).collect();
            let ok = set.iter().enumerate().all(|(i, &a)| set[i + 1..].iter().all(|&b| x.dist(a, b) > 2.0 * s));
            if ok {
                best = best.max(set.len());
            }
        }
        best
    }

    #[test]
    fn collinear_triple() {
        let x = FiniteMetricSpace::from_planar(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(packing_number(&x, 0.6, 10.0, 1), PackingCount::Exact(2));
        assert_eq!(packing_number(&x, 3.0, 2.0, 1), PackingCount::Exact(1));
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let pts: Vec<[f64; 2]> = (0..12).map(|_| [rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)]).collect();
            let x = FiniteMetricSpace::from_planar(&pts).unwrap();
            let s = rng.gen_range(0.1..0.8);
            let t = s + rng.gen_range(0.5..3.0);
            let c = rng.gen_range(0..12);
            assert_eq!(packing_number(&x, s, t, c).lower(), brute_force(&x, s, t, c));
        }
    }

    #[test]
    fn large_sets_give_valid_bounds() {
        let pts: Vec<[f64; 2]> = (0..20).flat_map(|i| (0..20).map(move |j| [i as f64 * 0.1, j as f64 * 0.1])).collect();
        let x = FiniteMetricSpace::from_planar(&pts).unwrap();
        let p = packing_number(&x, 0.25, 2.0, 0);
        assert!(p.lower() <= p.upper());
        assert!(p.lower() >= 9, "{p:?}");
    }

    #[test]
    fn flat_ceiling() {
        let c = bishop_gromov_ceiling(2, 0.0, 0.5, 2.0).unwrap();
        assert!((c - 16.0).abs() < 1e-12);
    }
}
