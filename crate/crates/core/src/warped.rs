//! Rotationally symmetric surfaces `dt^2 + f(t)^2 dphi^2` with a smooth pole
//! at `t = 0`.
//!
//! Directions at a point are angles measured from the outward radial vector
//! `d/dt` towards `d/dphi`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::QuinticHermite;
use crate::spaceform::{cs, sn};

/// Upper bound on the radial domain used for profiles that are defined on
/// all of `[0, inf)`.
pub const DEFAULT_T_MAX: f64 = 50.0;

/// Number of bisection steps on the initial direction in [`warped_distance`].
const SHOOT_BISECTIONS: usize = 60;
/// Largest change of phi within one substep.
const MAX_TURN: f64 = 0.004;

type ProfileFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// What a [`WarpProfile`] was built from.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileDescriptor {
    SpaceForm { curvature: f64 },
    Ballchange { s: f64 },
    Custom { name: String },
}

#[derive(Clone)]
enum ProfileKind {
    SpaceForm(f64),
    Ballchange(Box<BallchangeCurvature>),
    Custom { name: String, eval: ProfileFn },
}

/// Warp function `f` of a warped product, with its first two derivatives.
#[derive(Clone)]
pub struct WarpProfile {
    kind: ProfileKind,
    t_max: f64,
}

impl fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpProfile")
            .field("descriptor", &self.descriptor())
            .field("t_max", &self.t_max)
            .finish()
    }
}

impl WarpProfile {
    /// `f = sn_K`, the model space of curvature `k` in geodesic polar
    /// coordinates. Spheres end at their antipodal pole, other models at
    /// [`DEFAULT_T_MAX`].
    pub fn space_form(curvature: f64) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(Error::domain("curvature must be finite"));
        }
        let t_max = if curvature > 0.0 {
            PI / curvature.sqrt()
        } else {
            DEFAULT_T_MAX
        };
        Ok(Self {
            kind: ProfileKind::SpaceForm(curvature),
            t_max,
        })
    }

    /// A user-supplied profile. `eval(t)` returns `[f, f', f'']`.
    ///
    /// The pole conditions and the consistency of the derivatives are
    /// checked on a grid before the profile is accepted.
    pub fn custom<F>(name: impl Into<String>, t_max: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::domain("t_max must be positive and finite"));
        }
        let profile = Self {
            kind: ProfileKind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
            },
            t_max,
        };
        profile.check_invariants()?;
        Ok(profile)
    }

    /// Restricts the radial domain.
    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || t_max > self.t_max {
            return Err(Error::domain(format!(
                "t_max {t_max} must lie in (0, {}]",
                self.t_max
            )));
        }
        self.t_max = t_max;
        Ok(self)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn descriptor(&self) -> ProfileDescriptor {
        match &self.kind {
            ProfileKind::SpaceForm(k) => ProfileDescriptor::SpaceForm { curvature: *k },
            ProfileKind::Ballchange(b) => ProfileDescriptor::Ballchange { s: b.s },
            ProfileKind::Custom { name, .. } => ProfileDescriptor::Custom { name: name.clone() },
        }
    }

    /// The ballchange curvature schedule, when this profile is one.
    pub fn ballchange(&self) -> Option<&BallchangeCurvature> {
        match &self.kind {
            ProfileKind::Ballchange(b) => Some(b),
            _ => None,
        }
    }

    /// `[f(t), f'(t), f''(t)]`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match &self.kind {
            ProfileKind::SpaceForm(k) => [sn(*k, t), cs(*k, t), -k * sn(*k, t)],
            ProfileKind::Ballchange(b) => {
                let (u, du, ddu) = b.product(t);
                let (sh, ch) = (u.sinh(), u.cosh());
                [sh, ch * du, sh * du * du + ch * ddu]
            }
            ProfileKind::Custom { eval, .. } => eval(t),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    /// Whether `f` closes up at `t_max` (a second pole, as on the sphere).
    fn closes_at_t_max(&self) -> bool {
        self.f(self.t_max).abs() < 1e-9
    }

    fn check_invariants(&self) -> Result<()> {
        let [f0, df0, _] = self.eval(0.0);
        if f0.abs() > 1e-12 || (df0 - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "no smooth pole: f(0) = {f0}, f'(0) = {df0}"
            )));
        }
        let h = 1e-4;
        let n = 200;
        for i in 1..n {
            let t = self.t_max * i as f64 / n as f64;
            let [f, df, ddf] = self.eval(t);
            if !(f > 0.0) {
                return Err(Error::domain(format!("f({t}) = {f} is not positive")));
            }
            if t + h >= self.t_max || t - h <= 0.0 {
                continue;
            }
            let [fp, dfp, _] = self.eval(t + h);
            let [fm, dfm, _] = self.eval(t - h);
            let fd1 = (fp - fm) / (2.0 * h);
            let fd2 = (dfp - dfm) / (2.0 * h);
            let scale1 = df.abs().max(f.abs()).max(1.0);
            let scale2 = ddf.abs().max(df.abs()).max(1.0);
            if (fd1 - df).abs() > 1e-6 * scale1 || (fd2 - ddf).abs() > 1e-6 * scale2 {
                return Err(Error::domain(format!(
                    "derivatives inconsistent with f at t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Radial sectional curvature `-f''(t)/f(t)` at distance `t` from the pole.
pub fn radial_curvature(profile: &WarpProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) || t >= profile.t_max {
        return Err(Error::domain(format!(
            "t = {t} outside the open interval (0, {})",
            profile.t_max
        )));
    }
    if let Some(b) = profile.ballchange() {
        // -f''/f for f = sinh(u) is -u'^2 - u'' coth(u).
        let (u, du, ddu) = b.product(t);
        return Ok(-du * du - ddu / u.tanh());
    }
    let [f, _, ddf] = profile.eval(t);
    Ok(-ddf / f)
}

/// Curvature schedule `K_s(t)` of the ballchange family, `f = sinh(K_s(t) t)`.
///
/// `K_s = 1` on `[0, 1]`, `K_s = 1 + ln(t)^(1/3)/s` on `[2, T]` with
/// `T = exp(27 s^3)`, and `K_s = 4 + 1/(s T + s)` beyond `T + 1`. The two
/// transition intervals are quintic Hermite blends matching value, slope and
/// curvature at both ends.
#[derive(Clone, Debug)]
pub struct BallchangeCurvature {
    s: f64,
    outer_start: f64,
    far_value: f64,
    inner: QuinticHermite,
    outer: Option<QuinticHermite>,
}

impl BallchangeCurvature {
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `T = exp(27 s^3)`, where the logarithmic regime ends.
    pub fn outer_start(&self) -> f64 {
        self.outer_start
    }

    fn log_regime(&self, t: f64) -> (f64, f64, f64) {
        let l = t.ln();
        let c = l.cbrt();
        let k = 1.0 + c / self.s;
        let dk = c / (3.0 * l * t * self.s);
        let ddk = -(2.0 / 9.0) * c / (l * l * t * t * self.s) - c / (3.0 * l * t * t * self.s);
        (k, dk, ddk)
    }

    /// `(K_s(t), K_s'(t), K_s''(t))`.
    pub fn curvature_parameter(&self, t: f64) -> (f64, f64, f64) {
        if t <= 1.0 {
            (1.0, 0.0, 0.0)
        } else if t < 2.0 {
            self.inner.eval(t)
        } else if t <= self.outer_start {
            self.log_regime(t)
        } else if let Some(outer) = &self.outer {
            if t < outer.end() {
                outer.eval(t)
            } else {
                (self.far_value, 0.0, 0.0)
            }
        } else {
            self.log_regime(t)
        }
    }

    /// `u = K_s(t) t` with its first two derivatives.
    fn product(&self, t: f64) -> (f64, f64, f64) {
        let (k, dk, ddk) = self.curvature_parameter(t);
        (k * t, dk * t + k, ddk * t + 2.0 * dk)
    }

    /// Largest `|K'|` and `|K''|` on `[a, b]` sampled with step `1e-4`.
    pub fn derivative_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let n = ((b - a) / 1e-4).ceil() as usize;
        (0..=n)
            .map(|i| a + (b - a) * i as f64 / n as f64)
            .map(|t| {
                let (_, d, dd) = self.curvature_parameter(t);
                (d.abs(), dd.abs())
            })
            .fold((0.0, 0.0), |(m1, m2), (d, dd)| (f64::max(m1, d), f64::max(m2, dd)))
    }
}

/// Builds the ballchange warped product for family parameter `s`.
///
/// Fails when the logarithmic regime `[2, exp(27 s^3)]` is empty or when
/// the blend on `[1, 2]` breaks the `5/s` bound on `|K'|` or `|K''|`.
pub fn build_ballchange(s: f64) -> Result<WarpProfile> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("family parameter s = {s} must be positive")));
    }
    let outer_start = (27.0 * s.powi(3)).exp();
    if outer_start < 2.0 {
        return Err(Error::domain(format!(
            "s = {s} too small: exp(27 s^3) = {outer_start} < 2 leaves no logarithmic regime"
        )));
    }
    let far_value = 4.0 + 1.0 / (s * outer_start + s);
    let mut schedule = BallchangeCurvature {
        s,
        outer_start,
        far_value,
        inner: QuinticHermite::new(1.0, 2.0, [1.0, 0.0, 0.0], [0.0; 3]),
        outer: None,
    };
    let (k2, dk2, ddk2) = schedule.log_regime(2.0);
    schedule.inner = QuinticHermite::new(1.0, 2.0, [1.0, 0.0, 0.0], [k2, dk2, ddk2]);
    if outer_start.is_finite() {
        let (kt, dkt, ddkt) = schedule.log_regime(outer_start);
        schedule.outer = Some(QuinticHermite::new(
            outer_start,
            outer_start + 1.0,
            [kt, dkt, ddkt],
            [far_value, 0.0, 0.0],
        ));
    }

    let limit = 5.0 / s;
    let (d1, d2) = schedule.derivative_bounds(1.0, 2.0);
    if d1 > limit || d2 > limit {
        return Err(Error::precondition(format!(
            "blend on [1, 2] has |K'| = {d1}, |K''| = {d2}, above 5/s = {limit}"
        )));
    }
    let t_max = DEFAULT_T_MAX;
    if outer_start + 1.0 <= t_max {
        let outer_limit = 5.0 / (s * outer_start + s);
        let (o1, o2) = schedule.derivative_bounds(outer_start, outer_start + 1.0);
        if o1 > outer_limit || o2 > outer_limit {
            return Err(Error::precondition(format!(
                "outer blend has |K'| = {o1}, |K''| = {o2}, above {outer_limit}"
            )));
        }
    }
    Ok(WarpProfile {
        kind: ProfileKind::Ballchange(Box::new(schedule)),
        t_max,
    })
}

/// A point `(t, phi)`; `phi` is ignored at the pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpedPoint {
    pub t: f64,
    pub phi: f64,
}

impl WarpedPoint {
    pub fn new(t: f64, phi: f64) -> Self {
        Self { t, phi }
    }

    pub fn pole() -> Self {
        Self { t: 0.0, phi: 0.0 }
    }

    /// `phi` reduced to `[0, 2 pi)`.
    pub fn normalized(self) -> Self {
        Self {
            t: self.t,
            phi: self.phi.rem_euclid(2.0 * PI),
        }
    }
}

/// Position and unit velocity of a geodesic at one arclength sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicState {
    pub s: f64,
    pub t: f64,
    pub phi: f64,
    pub dt: f64,
    pub dphi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathStatus {
    Completed,
    /// The geodesic reached `t_max` at this arclength and was stopped.
    ExitedDomain { at: f64 },
}

#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicState>,
    pub length: f64,
    /// `f(t)^2 dphi/ds` at the start.
    pub clairaut: f64,
    pub status: PathStatus,
}

impl GeodesicPath {
    pub fn end(&self) -> WarpedPoint {
        let last = self.samples.last().expect("paths hold at least the start");
        WarpedPoint::new(last.t, last.phi)
    }

    /// Worst absolute drift of the Clairaut constant `f^2 dphi/ds` along the
    /// path.
    pub fn clairaut_drift(&self, profile: &WarpProfile) -> f64 {
        self.samples
            .iter()
            .map(|st| {
                let f = profile.f(st.t);
                (f * f * st.dphi - self.clairaut).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Worst deviation of the speed from one.
    pub fn speed_error(&self, profile: &WarpProfile) -> f64 {
        self.samples
            .iter()
            .map(|st| {
                let f = profile.f(st.t);
                ((st.dt * st.dt + f * f * st.dphi * st.dphi).sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
struct State {
    t: f64,
    phi: f64,
    dt: f64,
    dphi: f64,
}

impl State {
    fn axpy(self, h: f64, d: [f64; 4]) -> State {
        State {
            t: self.t + h * d[0],
            phi: self.phi + h * d[1],
            dt: self.dt + h * d[2],
            dphi: self.dphi + h * d[3],
        }
    }
}

fn rhs(profile: &WarpProfile, y: State) -> [f64; 4] {
    let [f, df, _] = profile.eval(y.t);
    [
        y.dt,
        y.dphi,
        f * df * y.dphi * y.dphi,
        -2.0 * df / f * y.dt * y.dphi,
    ]
}

fn rk4_step(profile: &WarpProfile, y: State, h: f64) -> State {
    let k1 = rhs(profile, y);
    let k2 = rhs(profile, y.axpy(0.5 * h, k1));
    let k3 = rhs(profile, y.axpy(0.5 * h, k2));
    let k4 = rhs(profile, y.axpy(h, k3));
    State {
        t: y.t + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        phi: y.phi + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        dt: y.dt + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        dphi: y.dphi + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    }
}

/// One nominal step, subdivided where the angular velocity is large (close
/// passes by the pole).
fn step(profile: &WarpProfile, y: State, h: f64) -> State {
    let pieces = (h * y.dphi.abs() / MAX_TURN).ceil().clamp(1.0, 100_000.0) as usize;
    let sub = h / pieces as f64;
    (0..pieces).fold(y, |acc, _| rk4_step(profile, acc, sub))
}

/// Step size used for a shot of length `length`.
fn step_size(length: f64) -> f64 {
    if length > 0.0 {
        (1e-3f64).min(length / 1000.0)
    } else {
        1e-3
    }
}

enum Control {
    Continue,
    Stop,
}

/// Outcome of streaming a geodesic.
enum Shot {
    Completed(State),
    Exited(f64),
    Stopped,
}

/// Radial geodesics, handled in closed form including passages through the
/// pole(s).
fn radial_state(profile: &WarpProfile, t0: f64, phi0: f64, inward: bool, s: f64) -> Option<State> {
    let closes = profile.closes_at_t_max();
    let t_max = profile.t_max;
    let mut t = if inward { t0 - s } else { t0 + s };
    let mut phi = phi0;
    let mut dir = if inward { -1.0 } else { 1.0 };
    loop {
        if t < 0.0 {
            t = -t;
            phi += PI;
            dir = -dir;
        } else if t > t_max {
            if !closes {
                return None;
            }
            t = 2.0 * t_max - t;
            phi += PI;
            dir = -dir;
        } else {
            break;
        }
    }
    Some(State {
        t,
        phi,
        dt: dir,
        dphi: 0.0,
    })
}

/// Starting state for direction `alpha` at `start`.
fn initial_state(profile: &WarpProfile, start: WarpedPoint, alpha: f64) -> State {
    if start.t <= 0.0 {
        // Leaving the pole along the meridian phi = alpha.
        return State {
            t: 0.0,
            phi: alpha,
            dt: 1.0,
            dphi: 0.0,
        };
    }
    let f = profile.f(start.t);
    State {
        t: start.t,
        phi: start.phi,
        dt: alpha.cos(),
        dphi: alpha.sin() / f,
    }
}

fn is_radial(profile: &WarpProfile, y: &State) -> bool {
    y.t <= 0.0 || (profile.f(y.t).powi(2) * y.dphi).abs() < 1e-13
}

/// Streams the geodesic, calling `observe(prev, next, h)` after every step.
fn integrate<F>(profile: &WarpProfile, start: WarpedPoint, alpha: f64, length: f64, mut observe: F) -> Shot
where
    F: FnMut(&State, &State, f64, f64) -> Control,
{
    let y0 = initial_state(profile, start, alpha);
    let h = step_size(length);
    let n = (length / h).ceil().max(0.0) as usize;
    let radial = is_radial(profile, &y0);
    let inward = radial && start.t > 0.0 && alpha.cos() < 0.0;
    let mut y = y0;
    let mut s = 0.0;
    for i in 0..n {
        let hi = if i + 1 == n { length - s } else { h };
        let next = if radial {
            match radial_state(profile, y0.t, y0.phi, inward, s + hi) {
                Some(st) => st,
                None => return Shot::Exited(s),
            }
        } else {
            let mut st = step(profile, y, hi);
            if st.t < 0.0 {
                // Numerical overshoot through the pole.
                st = State {
                    t: -st.t,
                    phi: st.phi + PI,
                    dt: -st.dt,
                    dphi: st.dphi,
                };
            }
            st
        };
        if next.t >= profile.t_max && !radial {
            return Shot::Exited(s);
        }
        if let Control::Stop = observe(&y, &next, s, hi) {
            return Shot::Stopped;
        }
        y = next;
        s += hi;
    }
    Shot::Completed(y)
}

fn to_sample(s: f64, y: &State) -> GeodesicState {
    GeodesicState {
        s,
        t: y.t,
        phi: y.phi,
        dt: y.dt,
        dphi: y.dphi,
    }
}

/// Shoots the unit-speed geodesic from `start` in direction `alpha` for
/// arclength `length` with fixed-step RK4.
///
/// Leaving `(0, t_max)` is reported through [`PathStatus::ExitedDomain`];
/// the samples stop at the last point inside the domain.
pub fn geodesic_shoot(profile: &WarpProfile, start: WarpedPoint, alpha: f64, length: f64) -> Result<GeodesicPath> {
    if !length.is_finite() || length < 0.0 {
        return Err(Error::domain(format!("length {length} must be finite and >= 0")));
    }
    if !(start.t >= 0.0) || start.t >= profile.t_max {
        return Err(Error::domain(format!(
            "start t = {} outside [0, {})",
            start.t, profile.t_max
        )));
    }
    let y0 = initial_state(profile, start, alpha);
    let f0 = profile.f(y0.t);
    let clairaut = f0 * f0 * y0.dphi;
    let mut samples = vec![to_sample(0.0, &y0)];
    let shot = integrate(profile, start, alpha, length, |_, next, s, h| {
        samples.push(to_sample(s + h, next));
        Control::Continue
    });
    let status = match shot {
        Shot::Exited(at) => PathStatus::ExitedDomain { at },
        _ => PathStatus::Completed,
    };
    let length = samples.last().map_or(0.0, |st| st.s);
    Ok(GeodesicPath {
        samples,
        length,
        clairaut,
        status,
    })
}

/// Endpoint of the geodesic, failing if it leaves the domain.
pub fn geodesic_endpoint(profile: &WarpProfile, start: WarpedPoint, alpha: f64, length: f64) -> Result<WarpedPoint> {
    if !(start.t >= 0.0) || start.t >= profile.t_max {
        return Err(Error::domain(format!("start t = {} outside [0, {})", start.t, profile.t_max)));
    }
    match integrate(profile, start, alpha, length, |_, _, _, _| Control::Continue) {
        Shot::Completed(y) => Ok(WarpedPoint::new(y.t, y.phi)),
        Shot::Exited(at) => Err(Error::DomainExit { at }),
        Shot::Stopped => unreachable!("observer never stops"),
    }
}

/// First crossing of the meridian `phi = target` (unwrapped) by the shot in
/// direction `alpha`, as `(t, arclength)`.
fn meridian_crossing(profile: &WarpProfile, start: WarpedPoint, alpha: f64, target: f64, budget: f64) -> Option<(f64, f64)> {
    let mut found = None;
    integrate(profile, start, alpha, budget, |prev, next, s, h| {
        if next.phi < target {
            return Control::Continue;
        }
        // Newton on the partial step length.
        let mut sigma = if prev.dphi > 0.0 {
            ((target - prev.phi) / prev.dphi).clamp(0.0, h)
        } else {
            0.5 * h
        };
        let mut y = step(profile, *prev, sigma);
        for _ in 0..12 {
            let err = y.phi - target;
            if err.abs() < 1e-15 || y.dphi <= 0.0 {
                break;
            }
            sigma = (sigma - err / y.dphi).clamp(0.0, h);
            y = step(profile, *prev, sigma);
        }
        found = Some((y.t, s + sigma));
        Control::Stop
    });
    found
}

/// Length of the minimizing geodesic between `p` and `q`.
///
/// Bisects the initial direction at `p` until the geodesic crosses the
/// meridian of `q` at radius `t_q`, and compares the result with the path
/// through the pole.
pub fn warped_distance(profile: &WarpProfile, p: WarpedPoint, q: WarpedPoint) -> Result<f64> {
    for (name, pt) in [("p", p), ("q", q)] {
        if !(pt.t >= 0.0) || pt.t > profile.t_max {
            return Err(Error::domain(format!(
                "{name}.t = {} outside [0, {}]",
                pt.t, profile.t_max
            )));
        }
    }
    if p.t == 0.0 || q.t == 0.0 {
        return Ok(p.t.max(q.t));
    }
    let mut dphi = (q.phi - p.phi).rem_euclid(2.0 * PI);
    if dphi > PI {
        dphi = 2.0 * PI - dphi;
    }
    if dphi < 1e-15 {
        return Ok((p.t - q.t).abs());
    }
    let through_pole = p.t + q.t;
    let start = WarpedPoint::new(p.t, 0.0);
    let budget = through_pole * (1.0 + 1e-9);

    // alpha -> 0 heads outward and never reaches the meridian; alpha -> pi
    // passes the pole and crosses it at radius close to 0.
    let (mut lo, mut hi) = (0.0, PI);
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..SHOOT_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match meridian_crossing(profile, start, mid, dphi, budget) {
            Some((t, len)) if t <= q.t => {
                hi = mid;
                best = Some((t, len));
            }
            Some((t, len)) => {
                lo = mid;
                if best.map_or(true, |(bt, _)| (t - q.t).abs() < (bt - q.t).abs()) {
                    best = Some((t, len));
                }
            }
            None => lo = mid,
        }
    }
    let shot = meridian_crossing(profile, start, 0.5 * (lo + hi), dphi, budget).or(best);
    match shot {
        Some((t, len)) if (t - q.t).abs() <= 1e-7 * q.t.max(1.0) => Ok(len.min(through_pole)),
        Some((t, _)) if hi - lo > 1e-9 => Err(Error::NonConvergence(format!(
            "shooting bracket [{lo}, {hi}] ends at t = {t}, target {}",
            q.t
        ))),
        // Only the pole path remains, e.g. when the bracket collapsed onto
        // the inward radial direction.
        _ => Ok(through_pole),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> WarpProfile {
        WarpProfile::space_form(0.0).unwrap()
    }

    #[test]
    fn curvature_of_space_form_profiles() {
        let sphere = WarpProfile::space_form(1.0).unwrap();
        let hyp = WarpProfile::space_form(-1.0).unwrap();
        for &t in &[0.1, 0.7, 1.5, 2.9] {
            assert!((radial_curvature(&sphere, t).unwrap() - 1.0).abs() < 1e-12);
            assert!(radial_curvature(&flat(), t).unwrap().abs() < 1e-15);
            assert!((radial_curvature(&hyp, t).unwrap() + 1.0).abs() < 1e-12);
        }
        assert!(radial_curvature(&sphere, 0.0).is_err());
        assert!(radial_curvature(&sphere, PI).is_err());
    }

    #[test]
    fn ballchange_curvature_parameter() {
        for &s in &[1.0, 5.0, 50.0] {
            let p = build_ballchange(s).unwrap();
            let b = p.ballchange().unwrap();
            assert_eq!(b.curvature_parameter(0.5).0, 1.0);
            let expected = 1.0 + 2f64.ln().cbrt() / s;
            assert!((b.curvature_parameter(2.0).0 - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn ballchange_blend_bounds() {
        let p = build_ballchange(5.0).unwrap();
        let (d1, d2) = p.ballchange().unwrap().derivative_bounds(1.0, 2.0);
        assert!(d1 <= 1.0 && d2 <= 1.0, "{d1} {d2}");
    }

    #[test]
    fn ballchange_small_s_has_outer_regime() {
        let p = build_ballchange(0.6).unwrap();
        let b = p.ballchange().unwrap();
        let t = b.outer_start() + 2.0;
        let expected = 4.0 + 1.0 / (0.6 * b.outer_start() + 0.6);
        assert!((b.curvature_parameter(t).0 - expected).abs() < 1e-12);
        assert!(build_ballchange(0.2).is_err());
        // The outer blend is too steep this close to the lower limit.
        assert!(matches!(build_ballchange(0.5), Err(Error::Precondition(_))));
        assert!(build_ballchange(-1.0).is_err());
    }

    #[test]
    fn ballchange_profile_derivatives_match_differences() {
        let p = build_ballchange(3.0).unwrap();
        let h = 1e-5;
        for i in 1..300 {
            // Offset keeps the stencil off the blend endpoints.
            let t = i as f64 * 0.01 + 0.003;
            let [_, df, ddf] = p.eval(t);
            let fd1 = (p.f(t + h) - p.f(t - h)) / (2.0 * h);
            let fd2 = (p.eval(t + h)[1] - p.eval(t - h)[1]) / (2.0 * h);
            assert!((fd1 - df).abs() <= 1e-6 * df.abs().max(1.0), "t={t}");
            assert!((fd2 - ddf).abs() <= 1e-6 * ddf.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn custom_profile_checks() {
        let ok = WarpProfile::custom("sinh", 5.0, |t| [t.sinh(), t.cosh(), t.sinh()]);
        assert!(ok.is_ok());
        let no_pole = WarpProfile::custom("cosh", 5.0, |t| [t.cosh(), t.sinh(), t.cosh()]);
        assert!(no_pole.is_err());
        let wrong = WarpProfile::custom("bad", 5.0, |t| [t.sinh(), t.cosh(), 0.0]);
        assert!(wrong.is_err());
    }

    #[test]
    fn flat_shots_are_straight() {
        let start = WarpedPoint::new(1.2, 0.3);
        for i in 0..12 {
            let alpha = i as f64 * 0.5;
            let end = geodesic_endpoint(&flat(), start, alpha, 2.0).unwrap();
            let d = crate::spaceform::law_of_cosines(0.0, angle_between(start.phi, end.phi), start.t, end.t).unwrap();
            assert!((d - 2.0).abs() < 1e-9, "alpha={alpha}: {d}");
        }
    }

    fn angle_between(a: f64, b: f64) -> f64 {
        let d = (b - a).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }

    #[test]
    fn sphere_pole_shots_are_radial() {
        let sphere = WarpProfile::space_form(1.0).unwrap();
        let end = geodesic_endpoint(&sphere, WarpedPoint::pole(), 0.7, 2.5).unwrap();
        assert!((end.t - 2.5).abs() < 1e-12 && (end.phi - 0.7).abs() < 1e-12);
    }

    #[test]
    fn radial_shot_through_pole() {
        let end = geodesic_endpoint(&flat(), WarpedPoint::new(1.0, 0.0), PI, 3.0).unwrap();
        assert!((end.t - 2.0).abs() < 1e-12);
        assert!((end.phi.rem_euclid(2.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let p = WarpProfile::space_form(-1.0).unwrap().with_t_max(2.0).unwrap();
        let path = geodesic_shoot(&p, WarpedPoint::new(1.0, 0.0), 0.3, 5.0).unwrap();
        assert!(matches!(path.status, PathStatus::ExitedDomain { .. }));
        assert!(path.end().t < 2.0);
        assert!(matches!(
            geodesic_endpoint(&p, WarpedPoint::new(1.0, 0.0), 0.3, 5.0),
            Err(Error::DomainExit { .. })
        ));
    }

    #[test]
    fn clairaut_and_speed_are_conserved() {
        let p = build_ballchange(2.0).unwrap();
        let path = geodesic_shoot(&p, WarpedPoint::new(1.3, 0.0), 1.1, 3.0).unwrap();
        assert!(path.clairaut_drift(&p) < 1e-8);
        assert!(path.speed_error(&p) < 1e-8);
    }

    #[test]
    fn flat_distance_matches_law_of_cosines() {
        let cases = [(1.0, 0.0, 2.0, 1.0), (0.5, 1.0, 0.7, 3.0), (2.0, 0.0, 2.0, PI - 0.01), (0.3, 0.2, 1.9, 0.25)];
        for (tp, pp, tq, pq) in cases {
            let d = warped_distance(&flat(), WarpedPoint::new(tp, pp), WarpedPoint::new(tq, pq)).unwrap();
            let e = crate::spaceform::law_of_cosines(0.0, angle_between(pp, pq), tp, tq).unwrap();
            assert!((d - e).abs() < 1e-8, "{d} vs {e}");
        }
    }

    #[test]
    fn distance_special_cases() {
        let f = flat();
        assert_eq!(warped_distance(&f, WarpedPoint::pole(), WarpedPoint::new(1.5, 2.0)).unwrap(), 1.5);
        assert_eq!(warped_distance(&f, WarpedPoint::new(1.0, 2.0), WarpedPoint::new(1.5, 2.0)).unwrap(), 0.5);
        let d = warped_distance(&f, WarpedPoint::new(1.0, 0.0), WarpedPoint::new(1.5, PI)).unwrap();
        assert!((d - 2.5).abs() < 1e-12);
    }

    #[test]
    fn curved_distances_match_space_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for k in [1.0, -1.0] {
            let profile = WarpProfile::space_form(k).unwrap();
            let t_hi = if k > 0.0 { 3.0 } else { 2.5 };
            for _ in 0..30 {
                let p = WarpedPoint::new(rng.gen_range(0.05..t_hi), rng.gen_range(0.0..2.0 * PI));
                let q = WarpedPoint::new(rng.gen_range(0.05..t_hi), rng.gen_range(0.0..2.0 * PI));
                let d = warped_distance(&profile, p, q).unwrap();
                let e = crate::spaceform::law_of_cosines(k, angle_between(p.phi, q.phi), p.t, q.t).unwrap();
                assert!((d - e).abs() < 1e-6, "K={k} {p:?} {q:?}: {d} vs {e}");
            }
        }
    }
}
