//! Constant-curvature model geometries.
//!
//! Points live in the standard embedded models:
//!
//! - `K = 0`: Euclidean `R^n`, length-`n` coordinate vectors.
//! - `K > 0`: the sphere of radius `1/sqrt(K)` in `R^(n+1)`.
//! - `K < 0`: the upper sheet of the hyperboloid `<x, x>_L = -1/|K|` in
//!   Minkowski space `R^(1,n)`, with `x[0]` the time-like coordinate.
//!
//! For `K != 0` coordinate `0` is the pole axis, so [`SpaceFormParams::origin`]
//! is `(R, 0, ..., 0)` and the tangent space at the origin is spanned by the
//! remaining coordinate axes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;

/// Below this value of `|K| * max(s, t)^2` the triangle function is
/// evaluated by its series around `K = 0`.
const SERIES_THRESHOLD: f64 = 1e-8;

const ANGLE_SLACK: f64 = 1e-12;

/// Curvature and dimension of a model space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormParams {
    curvature: f64,
    dim: usize,
}

/// A point in the embedded model of a space form.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormPoint(Vec<f64>);

impl SpaceFormPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Generalised sine `sn_K(x)`: `sin(sqrt(K) x)/sqrt(K)`, `x`, or
/// `sinh(sqrt(-K) x)/sqrt(-K)`.
pub fn sn(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        x
    } else if k.abs() * x * x < SERIES_THRESHOLD {
        x * (1.0 - k * x * x / 6.0 + k * k * x.powi(4) / 120.0)
    } else if k > 0.0 {
        let r = k.sqrt();
        (r * x).sin() / r
    } else {
        let r = (-k).sqrt();
        (r * x).sinh() / r
    }
}

/// Generalised cosine, the derivative of [`sn`].
pub fn cs(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else if k > 0.0 {
        (k.sqrt() * x).cos()
    } else {
        ((-k).sqrt() * x).cosh()
    }
}

/// `sin^2(sqrt(K) x / 2) / K` (and its flat and hyperbolic analogues):
/// the quantity whose additivity underlies the stable law of cosines.
fn half_chord_sq(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.25 * x * x
    } else if k.abs() * x * x < SERIES_THRESHOLD {
        0.25 * x * x * (1.0 - k * x * x / 12.0 + k * k * x.powi(4) / 360.0)
    } else if k > 0.0 {
        let r = k.sqrt();
        (0.5 * r * x).sin().powi(2) / k
    } else {
        let r = (-k).sqrt();
        (0.5 * r * x).sinh().powi(2) / -k
    }
}

/// Inverse of [`sn`] on its monotone branch.
fn sn_inv(k: f64, v: f64) -> f64 {
    if k == 0.0 {
        v
    } else if k > 0.0 {
        let r = k.sqrt();
        (r * v).clamp(-1.0, 1.0).asin() / r
    } else {
        let r = (-k).sqrt();
        (r * v).asinh() / r
    }
}

fn model_diameter(k: f64) -> Option<f64> {
    (k > 0.0).then(|| PI / k.sqrt())
}

fn check_curvature(k: f64) -> Result<()> {
    if !k.is_finite() {
        return Err(Error::domain(format!("curvature {k} is not finite")));
    }
    Ok(())
}

fn check_length(k: f64, name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!("{name} = {x} must be a finite length >= 0")));
    }
    if let Some(diam) = model_diameter(k) {
        if x > diam * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "{name} = {x} exceeds the model diameter {diam} for K = {k}"
            )));
        }
    }
    Ok(())
}

fn check_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta < -ANGLE_SLACK || theta > PI + ANGLE_SLACK {
        return Err(Error::domain(format!("angle {theta} outside [0, pi]")));
    }
    Ok(theta.clamp(0.0, PI))
}

/// The triangle function of the model of curvature `k`: the distance between
/// the endpoints of two geodesics of lengths `s` and `t` leaving a common
/// point at angle `theta`.
///
/// Uses the half-angle form of the laws of cosines, which stays accurate for
/// short sides. When `|k| max(s,t)^2 < 1e-8` a fourth-order series in `k` is
/// used instead. For `k > 0` the result is clamped to the model diameter.
pub fn law_of_cosines(k: f64, theta: f64, s: f64, t: f64) -> Result<f64> {
    check_curvature(k)?;
    let theta = check_angle(theta)?;
    check_length(k, "s", s)?;
    check_length(k, "t", t)?;

    let half = (0.5 * theta).sin().powi(2);
    let longest = s.max(t);

    if k == 0.0 {
        let c = theta.cos();
        if c <= 1e-15 {
            // No cancellation when the cosine term is non-negative.
            return Ok((s * s + t * t - 2.0 * s * t * c).sqrt());
        }
        let d = s - t;
        return Ok((d * d + 4.0 * s * t * half).sqrt());
    }

    if k.abs() * longest * longest < SERIES_THRESHOLD {
        let y = half_chord_sq(k, s - t) + sn(k, s) * sn(k, t) * half;
        let ky = k * y;
        return Ok(2.0 * y.sqrt() * (1.0 + ky / 6.0 + 3.0 * ky * ky / 40.0));
    }

    if k > 0.0 {
        let r = k.sqrt();
        let (ss, st) = ((r * s).sin(), (r * t).sin());
        let h = (0.5 * r * (s - t)).sin().powi(2) + ss * st * half;
        let angle = if h <= 0.5 {
            2.0 * h.max(0.0).sqrt().asin()
        } else {
            // Complementary form near the antipode.
            let c = (0.5 * r * (s + t)).cos().powi(2) + ss * st * (0.5 * theta).cos().powi(2);
            PI - 2.0 * c.clamp(0.0, 1.0).sqrt().asin()
        };
        Ok((angle / r).clamp(0.0, PI / r))
    } else {
        let r = (-k).sqrt();
        let y = (0.5 * r * (s - t)).sinh().powi(2) + (r * s).sinh() * (r * t).sinh() * half;
        Ok(2.0 * y.max(0.0).sqrt().asinh() / r)
    }
}

/// Solves `law_of_cosines(k, theta, a, b) = d` for `theta` by bisection.
///
/// When the triangle function is constant in `theta` (one side zero, or both
/// sides at the sphere's diameter) the smallest solution, `0`, is returned.
pub fn invert_angle(k: f64, a: f64, b: f64, d: f64) -> Result<f64> {
    check_curvature(k)?;
    check_length(k, "a", a)?;
    check_length(k, "b", b)?;
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain(format!("distance {d} must be finite and >= 0")));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::Degenerate("both sides are zero; every angle solves".into()));
    }

    let lo_val = law_of_cosines(k, 0.0, a, b)?;
    let hi_val = law_of_cosines(k, PI, a, b)?;
    let slack = 1e-12 * d.max(1.0);
    if d < lo_val - slack || d > hi_val + slack {
        return Err(Error::NoSolution(format!(
            "d = {d} outside [{lo_val}, {hi_val}] for sides ({a}, {b}) at K = {k}"
        )));
    }
    if d <= lo_val {
        return Ok(0.0);
    }
    if d >= hi_val {
        return Ok(PI);
    }

    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..80 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if law_of_cosines(k, mid, a, b)? < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Area of the unit sphere `S^(n-1)` bounding the unit ball of `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// `x - sin x` without cancellation for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x - x.sin();
    }
    // x^3/3! - x^5/5! + ...
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = 0.0_f64;
    let mut n = 3.0;
    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
        sum += term;
        term *= -x2 / ((n + 1.0) * (n + 2.0));
        n += 2.0;
    }
    sum
}

/// `sinh x - x` without cancellation for small `x`.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.sinh() - x;
    }
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = 0.0_f64;
    let mut n = 3.0;
    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
        sum += term;
        term *= x2 / ((n + 1.0) * (n + 2.0));
        n += 2.0;
    }
    sum
}

/// Volume of a geodesic ball of radius `r` in the `n`-dimensional model of
/// curvature `k`, i.e. `omega_(n-1) * int_0^r sn_K(t)^(n-1) dt`.
pub fn ball_volume(n: usize, k: f64, r: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    check_curvature(k)?;
    check_length(k, "r", r)?;
    if k == 0.0 {
        return Ok(unit_ball_volume(n) * r.powi(n as i32));
    }
    let root = k.abs().sqrt();
    match n {
        1 => Ok(2.0 * r),
        2 => Ok(4.0 * PI * half_chord_sq(k, r)),
        3 => {
            let x = 2.0 * root * r;
            let core = if k > 0.0 { x_minus_sin(x) } else { sinh_minus_x(x) };
            Ok(PI * core / (k.abs() * root))
        }
        _ => {
            let area = unit_sphere_area(n);
            let integral = gauss_legendre(|t| sn(k, t).powi(n as i32 - 1), 0.0, r, 64);
            Ok(area * integral)
        }
    }
}

impl SpaceFormParams {
    pub fn new(curvature: f64, dim: usize) -> Result<Self> {
        check_curvature(curvature)?;
        if dim < 2 {
            return Err(Error::domain(format!("dimension {dim} must be at least 2")));
        }
        Ok(Self { curvature, dim })
    }

    /// Two-dimensional model of curvature `k`.
    pub fn surface(curvature: f64) -> Result<Self> {
        Self::new(curvature, 2)
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `pi/sqrt(K)` for spheres, `None` otherwise.
    pub fn diameter(&self) -> Option<f64> {
        model_diameter(self.curvature)
    }

    fn is_flat(&self) -> bool {
        self.curvature == 0.0
    }

    /// Model radius `1/sqrt(|K|)`; meaningless for flat models.
    fn radius(&self) -> f64 {
        1.0 / self.curvature.abs().sqrt()
    }

    pub fn ambient_dim(&self) -> usize {
        if self.is_flat() {
            self.dim
        } else {
            self.dim + 1
        }
    }

    /// Model inner product: Euclidean, or Minkowski `-x0 y0 + sum xi yi`
    /// for `K < 0`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if self.curvature < 0.0 {
            dot - 2.0 * a[0] * b[0]
        } else {
            dot
        }
    }

    pub fn origin(&self) -> SpaceFormPoint {
        let mut c = vec![0.0; self.ambient_dim()];
        if !self.is_flat() {
            c[0] = self.radius();
        }
        SpaceFormPoint(c)
    }

    /// Validates raw model coordinates.
    pub fn point(&self, coords: Vec<f64>) -> Result<SpaceFormPoint> {
        let p = SpaceFormPoint(coords);
        self.validate(&p)?;
        Ok(p)
    }

    pub fn validate(&self, p: &SpaceFormPoint) -> Result<()> {
        let c = &p.0;
        if c.len() != self.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if self.is_flat() {
            return Ok(());
        }
        let r2 = self.radius().powi(2);
        let scale: f64 = c.iter().map(|x| x * x).sum::<f64>().max(r2);
        if self.curvature > 0.0 {
            let norm2 = self.inner(c, c);
            if (norm2 - r2).abs() > 2e-12 * scale {
                return Err(Error::InvalidPoint(format!(
                    "point off the sphere: |x|^2 = {norm2}, expected {r2}"
                )));
            }
        } else {
            let m = self.inner(c, c);
            if (m + r2).abs() > 2e-12 * scale || c[0] <= 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "point off the hyperboloid: <x,x> = {m}, expected {}",
                    -r2
                )));
            }
        }
        Ok(())
    }

    /// Pushes coordinates back onto the model after rounding.
    fn renormalize(&self, mut c: Vec<f64>) -> SpaceFormPoint {
        if self.curvature > 0.0 {
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            let s = self.radius() / norm;
            c.iter_mut().for_each(|x| *x *= s);
        } else if self.curvature < 0.0 {
            let spatial: f64 = c[1..].iter().map(|x| x * x).sum();
            c[0] = (self.radius().powi(2) + spatial).sqrt();
        }
        SpaceFormPoint(c)
    }

    /// Projects an ambient vector onto the tangent space at `p`.
    fn project_tangent(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        if self.is_flat() {
            return v.to_vec();
        }
        let coef = self.inner(p, v) / self.inner(p, p);
        v.iter().zip(p).map(|(vi, pi)| vi - coef * pi).collect()
    }

    fn normalize_tangent(&self, v: Vec<f64>) -> Option<Vec<f64>> {
        let n2 = self.inner(&v, &v);
        if !(n2 > 1e-300) {
            return None;
        }
        let n = n2.sqrt();
        Some(v.into_iter().map(|x| x / n).collect())
    }

    /// Orthonormal basis of the tangent space at `p`.
    ///
    /// At the origin this is the coordinate frame, so polar angles about the
    /// origin agree with [`SpaceFormParams::polar`].
    pub fn tangent_frame(&self, p: &SpaceFormPoint) -> Vec<Vec<f64>> {
        let amb = self.ambient_dim();
        let offset = usize::from(!self.is_flat());
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
        // Coordinate axes first, then the pole axis as a fallback for
        // points where one of them is normal.
        let order: Vec<usize> = (offset..amb).chain(0..offset).collect();
        for axis in order {
            if frame.len() == self.dim {
                break;
            }
            let mut e = vec![0.0; amb];
            e[axis] = 1.0;
            let mut u = self.project_tangent(&p.0, &e);
            for b in &frame {
                let c = self.inner(&u, b);
                u.iter_mut().zip(b).for_each(|(ui, bi)| *ui -= c * bi);
            }
            if self.inner(&u, &u) > 1e-8 {
                if let Some(u) = self.normalize_tangent(u) {
                    frame.push(u);
                }
            }
        }
        frame
    }

    /// Unit tangent at `p` obtained by combining the frame at `p` with the
    /// given coefficients.
    pub fn frame_direction(&self, p: &SpaceFormPoint, coefficients: &[f64]) -> Result<Vec<f64>> {
        let frame = self.tangent_frame(p);
        if coefficients.len() != frame.len() {
            return Err(Error::domain(format!(
                "expected {} frame coefficients, got {}",
                frame.len(),
                coefficients.len()
            )));
        }
        let mut v = vec![0.0; self.ambient_dim()];
        for (c, e) in coefficients.iter().zip(&frame) {
            v.iter_mut().zip(e).for_each(|(vi, ei)| *vi += c * ei);
        }
        self.normalize_tangent(v)
            .ok_or_else(|| Error::domain("zero direction"))
    }

    /// Unit tangent at `p` making angle `alpha` with the first frame vector
    /// (two-dimensional models only).
    pub fn direction(&self, p: &SpaceFormPoint, alpha: f64) -> Result<Vec<f64>> {
        if self.dim != 2 {
            return Err(Error::domain("angular directions need a 2-dimensional model"));
        }
        self.frame_direction(p, &[alpha.cos(), alpha.sin()])
    }

    /// Follows the geodesic from `base` with unit initial velocity `v` for
    /// arclength `t`.
    pub fn exp_map(&self, base: &SpaceFormPoint, v: &[f64], t: f64) -> Result<SpaceFormPoint> {
        self.validate(base)?;
        if v.len() != self.ambient_dim() {
            return Err(Error::domain(format!(
                "direction has {} coordinates, expected {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!("length {t} must be finite and >= 0")));
        }
        let p = &base.0;
        let scale = p.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let tangency = self.inner(p, v);
        if !self.is_flat() && tangency.abs() > 1e-9 * scale * scale.max(self.radius()) {
            return Err(Error::domain(format!("direction not tangent: <p, v> = {tangency}")));
        }
        let norm2 = self.inner(v, v);
        if (norm2 - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("direction not unit: |v|^2 = {norm2}")));
        }
        let coords: Vec<f64> = if self.is_flat() {
            p.iter().zip(v).map(|(pi, vi)| pi + t * vi).collect()
        } else {
            let r = self.radius();
            let (a, b) = if self.curvature > 0.0 {
                ((t / r).cos(), r * (t / r).sin())
            } else {
                ((t / r).cosh(), r * (t / r).sinh())
            };
            p.iter().zip(v).map(|(pi, vi)| a * pi + b * vi).collect()
        };
        Ok(self.renormalize(coords))
    }

    /// Intrinsic distance in the model.
    pub fn distance(&self, p: &SpaceFormPoint, q: &SpaceFormPoint) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.distance_unchecked(&p.0, &q.0))
    }

    pub(crate) fn distance_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        if self.is_flat() {
            return diff.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        let r = self.radius();
        if self.curvature > 0.0 {
            let chord = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            let angle = if chord <= r * std::f64::consts::SQRT_2 {
                2.0 * (chord / (2.0 * r)).min(1.0).asin()
            } else {
                let sum = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a + b) * (a + b))
                    .sum::<f64>()
                    .sqrt();
                PI - 2.0 * (sum / (2.0 * r)).min(1.0).asin()
            };
            (r * angle).clamp(0.0, PI * r)
        } else {
            let m = self.inner(&diff, &diff).max(0.0);
            2.0 * r * (m.sqrt() / (2.0 * r)).asinh()
        }
    }

    /// Unit tangent at `base` pointing along the minimizing geodesic to
    /// `target`, or `None` when the direction is undefined.
    pub fn log_direction(&self, base: &SpaceFormPoint, target: &SpaceFormPoint) -> Option<Vec<f64>> {
        let diff: Vec<f64> = target.0.iter().zip(&base.0).map(|(a, b)| a - b).collect();
        let u = self.project_tangent(&base.0, &diff);
        let u = if self.is_flat() { diff } else { u };
        self.normalize_tangent(u)
    }

    /// Angle at `base` between the geodesics to `a` and to `b`.
    pub fn angle_at(&self, base: &SpaceFormPoint, a: &SpaceFormPoint, b: &SpaceFormPoint) -> Option<f64> {
        let u = self.log_direction(base, a)?;
        let w = self.log_direction(base, b)?;
        let minus: Vec<f64> = u.iter().zip(&w).map(|(x, y)| x - y).collect();
        let plus: Vec<f64> = u.iter().zip(&w).map(|(x, y)| x + y).collect();
        let lm = self.inner(&minus, &minus).max(0.0).sqrt();
        let lp = self.inner(&plus, &plus).max(0.0).sqrt();
        Some(2.0 * lm.atan2(lp))
    }

    /// Smallest distance from `center` to the minimizing geodesic segment
    /// between `x` and `y`.
    pub fn segment_clearance(&self, center: &SpaceFormPoint, x: &SpaceFormPoint, y: &SpaceFormPoint) -> f64 {
        let dx = self.distance_unchecked(&center.0, &x.0);
        let dy = self.distance_unchecked(&center.0, &y.0);
        let endpoint = dx.min(dy);
        let (Some(at_x), Some(at_y)) = (self.angle_at(x, y, center), self.angle_at(y, x, center)) else {
            return endpoint;
        };
        if at_x >= 0.5 * PI || at_y >= 0.5 * PI {
            return endpoint;
        }
        // Right-triangle relation sn(h) = sn(dx) sin(A).
        let k = self.curvature;
        sn_inv(k, sn(k, dx) * at_x.sin()).min(endpoint)
    }

    /// Point at geodesic polar coordinates `(t, phi)` about the origin of a
    /// two-dimensional model.
    pub fn polar(&self, t: f64, phi: f64) -> Result<SpaceFormPoint> {
        let o = self.origin();
        let v = self.direction(&o, phi)?;
        self.exp_map(&o, &v, t)
    }

    /// Inverse of [`SpaceFormParams::polar`]: distance from the origin and
    /// angle in `[0, 2 pi)`.
    pub fn polar_coords(&self, p: &SpaceFormPoint) -> (f64, f64) {
        let o = self.origin();
        let t = self.distance_unchecked(&o.0, &p.0);
        let offset = usize::from(!self.is_flat());
        let phi = p.0[offset + 1].atan2(p.0[offset]).rem_euclid(2.0 * PI);
        (t, phi)
    }

    pub fn law_of_cosines(&self, theta: f64, s: f64, t: f64) -> Result<f64> {
        law_of_cosines(self.curvature, theta, s, t)
    }

    pub fn invert_angle(&self, a: f64, b: f64, d: f64) -> Result<f64> {
        invert_angle(self.curvature, a, b, d)
    }

    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        ball_volume(self.dim, self.curvature, r)
    }
}
