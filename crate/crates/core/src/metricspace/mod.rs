//! Finite metric spaces sampled from manifolds, ball packing counts and
//! Gromov-Hausdorff distance bounds.

mod gh;
mod packing;
mod sample;

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gh::{gh_lower, gh_upper, Correspondence, GhEstimate, GhOptions};
pub use packing::{bishop_gromov_ceiling, packing_number, PackingCount};
pub use sample::{epsilon_net_points, epsilon_net_sample, polar_lattice, NetOptions, NetSource};

/// Tolerance of the triangle inequality check on construction.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Spaces above this size get a sampled triangle check.
const FULL_TRIANGLE_CHECK: usize = 500;
const SAMPLED_TRIPLES: usize = 100_000;

/// Where a sample point came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub provenance: Option<Provenance>,
}

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            provenance: None,
        }
    }

    pub fn with_provenance(name: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            provenance: Some(provenance),
        }
    }
}

/// A finite metric space given by labels and a symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<Label>,
    d: Vec<f64>,
    n: usize,
}

impl FiniteMetricSpace {
    /// Builds a space from a full matrix, validating the metric axioms.
    pub fn new(labels: Vec<Label>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::domain(format!("matrix shape does not match {n} labels")));
        }
        let d: Vec<f64> = matrix.into_iter().flatten().collect();
        let space = Self { labels, d, n };
        space.validate()?;
        Ok(space)
    }

    /// Builds a space from a distance function evaluated on `i < j`.
    pub fn from_fn<F>(labels: Vec<Label>, dist: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let n = labels.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| dist(i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut d = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        let space = Self { labels, d, n };
        space.validate()?;
        Ok(space)
    }

    /// Points of the Euclidean plane, handy for tests and examples.
    pub fn from_planar(points: &[[f64; 2]]) -> Result<Self> {
        let labels = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Label::with_provenance(
                    format!("p{i}"),
                    Provenance {
                        source: "plane".into(),
                        coords: p.to_vec(),
                    },
                )
            })
            .collect();
        Self::from_fn(labels, |i, j| {
            Ok(((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt())
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::domain("a metric space needs at least one point"));
        }
        for i in 0..n {
            if self.d[i * n + i] != 0.0 {
                return Err(Error::domain(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let a = self.d[i * n + j];
                let b = self.d[j * n + i];
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::domain(format!("d({i}, {j}) = {a} must be positive and finite")));
                }
                if (a - b).abs() > 1e-12 * a.max(1.0) {
                    return Err(Error::domain(format!("asymmetric entries at ({i}, {j}): {a} vs {b}")));
                }
            }
        }
        if let Some((i, j, k)) = self.triangle_violation() {
            return Err(Error::domain(format!(
                "triangle inequality fails on ({i}, {j}, {k}): {} > {} + {}",
                self.dist(i, k),
                self.dist(i, j),
                self.dist(j, k)
            )));
        }
        Ok(())
    }

    fn violates(&self, i: usize, j: usize, k: usize) -> bool {
        self.dist(i, k) > self.dist(i, j) + self.dist(j, k) + TRIANGLE_TOL
    }

    /// A triple violating the triangle inequality, searched exhaustively for
    /// small spaces and on seeded random triples otherwise.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        if n < 3 {
            return None;
        }
        if n <= FULL_TRIANGLE_CHECK {
            return (0..n).into_par_iter().find_map_any(|i| {
                for j in 0..n {
                    for k in 0..n {
                        if self.violates(i, j, k) {
                            return Some((i, j, k));
                        }
                    }
                }
                None
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x7269_616e);
        (0..SAMPLED_TRIPLES)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
            .find(|&(i, j, k)| self.violates(i, j, k))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Subspace on the given indices, in that order.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let matrix = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist(i, j)).collect())
            .collect();
        Self::new(labels, matrix)
    }

    /// Same space with the points listed in the order `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::domain("permutation has the wrong length"));
        }
        self.subspace(perm)
    }

    /// Plain-text matrix format: `n`, then `n` label lines, then `n` rows of
    /// space-separated distances.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for l in &self.labels {
            let _ = writeln!(out, "{}", l.name);
        }
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad header {header:?}: {e}")))?;
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing label {i}")))?;
            labels.push(Label::new(line.trim_end_matches('\r')));
        }
        let mut matrix = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| Error::Parse(format!("row {i}: {tok:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            matrix.push(row);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after the matrix".into()));
        }
        Self::new(labels, matrix)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Outcome of [`check_almost_isometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostIsometryReport {
    pub passed: bool,
    /// `max |d_Y(phi x, phi x') - d_X(x, x')|`.
    pub distortion: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// `max_y d_Y(y, phi(X))`.
    pub onto_gap: f64,
    pub worst_point: Option<usize>,
}

/// Checks that `phi: X -> Y` is an `epsilon`-almost isometry: distances are
/// preserved up to `epsilon` and every point of `Y` lies within `epsilon` of
/// the image.
pub fn check_almost_isometry(
    phi: &[usize],
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    epsilon: f64,
) -> Result<AlmostIsometryReport> {
    if phi.len() != x.len() {
        return Err(Error::domain(format!("map has {} entries for {} points", phi.len(), x.len())));
    }
    if let Some(&bad) = phi.iter().find(|&&j| j >= y.len()) {
        return Err(Error::domain(format!("map target {bad} outside Y")));
    }
    let (distortion, worst_pair) = (0..x.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..x.len())
                .map(|j| ((y.dist(phi[i], phi[j]) - x.dist(i, j)).abs(), Some((i, j))))
                .fold((0.0, None), |a, b| if b.0 > a.0 { b } else { a })
        })
        .reduce(|| (0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    let (onto_gap, worst_point) = (0..y.len())
        .map(|j| {
            let gap = phi.iter().map(|&i| y.dist(j, i)).fold(f64::INFINITY, f64::min);
            (gap, Some(j))
        })
        .fold((0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    Ok(AlmostIsometryReport {
        passed: distortion < epsilon && onto_gap < epsilon,
        distortion,
        worst_pair,
        onto_gap,
        worst_point,
    })
}
