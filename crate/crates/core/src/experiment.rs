//! Config-driven experiments producing CSV artifacts.
//!
//! A config is a TOML document:
//!
//! ```toml
//! experiment = "ricci-check"
//! seed = 0
//! output = "ricci.csv"
//!
//! [parameters]
//! n = 2
//! radii = [0.1, 0.01]
//! ```
//!
//! Every artifact starts with `#` lines naming the tool version, the SHA-256
//! of the effective config and the seed.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::isotropy::{
    bad_directions, estimate_f, unseen_check, verify_axioms, IsotropyGrid, Region, DIRECTION_COUNT,
};
use crate::metricspace::{
    bishop_gromov_ceiling, epsilon_net_sample, gh_lower, gh_upper, packing_number, FiniteMetricSpace, GhOptions,
    NetOptions,
};
use crate::neck::{build_glued, check_glued, Side};
use crate::numeric::fmt_num;
use crate::spaceform::{law_of_cosines, SpaceFormParams};
use crate::wedge::{convergence_experiment, isotropy_convergence, ricci_violation, ConvergenceSettings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FkTable,
    Isotropy,
    Ghdist,
    Converge,
    RicciCheck,
    Packing,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FkTable => "fk-table",
            ExperimentKind::Isotropy => "isotropy",
            ExperimentKind::Ghdist => "ghdist",
            ExperimentKind::Converge => "converge",
            ExperimentKind::RicciCheck => "ricci-check",
            ExperimentKind::Packing => "packing",
        }
    }

    /// Curvature parameters zeroed by the `flat` preset.
    fn curvature_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::FkTable => &[],
            ExperimentKind::Isotropy | ExperimentKind::Packing => &["k", "k2"],
            ExperimentKind::Ghdist => &["kx", "ky"],
            ExperimentKind::Converge => &["k1", "k2"],
            ExperimentKind::RicciCheck => &["k1", "k2", "h"],
        }
    }
}

/// An experiment, its parameter block, seed and output path.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub parameters: toml::Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<ExperimentKind>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    #[serde(default)]
    parameters: toml::Table,
}

#[derive(Serialize)]
struct Canonical<'a> {
    experiment: ExperimentKind,
    seed: u64,
    parameters: &'a toml::Table,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            output_path: None,
            parameters: toml::Table::new(),
        }
    }

    /// Parses a config document. `default_kind` fills a missing
    /// `experiment` key and must agree with it when both are present.
    pub fn parse(text: &str, default_kind: Option<ExperimentKind>) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let experiment = match (file.experiment, default_kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!(
                    "config names experiment {} but {} was requested",
                    a.name(),
                    b.name()
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("config does not name an experiment".into())),
        };
        Ok(Self {
            experiment,
            seed: file.seed.unwrap_or(0),
            output_path: file.output,
            parameters: file.parameters,
        })
    }

    pub fn read(path: &Path, default_kind: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, default_kind)
    }

    /// Applies `key=value` (value in TOML syntax, bare words as strings) or
    /// a preset name. The only preset is `flat`, which zeroes every
    /// curvature.
    pub fn apply_override(&mut self, token: &str) -> Result<()> {
        let Some((key, raw)) = token.split_once('=') else {
            return self.apply_preset(token);
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("override {token:?} has no key")));
        }
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        self.parameters.insert(key.to_string(), value);
        Ok(())
    }

    fn apply_preset(&mut self, name: &str) -> Result<()> {
        match name {
            "flat" => {
                for key in self.experiment.curvature_keys() {
                    self.parameters.insert((*key).into(), toml::Value::Float(0.0));
                }
                if self.experiment == ExperimentKind::FkTable {
                    self.parameters
                        .insert("curvatures".into(), toml::Value::Array(vec![toml::Value::Float(0.0)]));
                }
                Ok(())
            }
            _ => Err(Error::Config(format!("unknown preset or malformed override {name:?}"))),
        }
    }

    /// SHA-256 of the experiment, seed and parameters in canonical TOML.
    pub fn hash(&self) -> String {
        let canonical = Canonical {
            experiment: self.experiment,
            seed: self.seed,
            parameters: &self.parameters,
        };
        let text = toml::to_string(&canonical).unwrap_or_default();
        Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn params<P: DeserializeOwned>(&self) -> Result<P> {
        toml::Value::Table(self.parameters.clone())
            .try_into()
            .map_err(|e| Error::Config(format!("{} parameters: {e}", self.experiment.name())))
    }

    /// Typed, precondition-checked parameters.
    pub fn plan(&self) -> Result<Plan> {
        let plan = match self.experiment {
            ExperimentKind::FkTable => Plan::FkTable(self.params()?),
            ExperimentKind::Isotropy => Plan::Isotropy(self.params()?),
            ExperimentKind::Ghdist => Plan::Ghdist(self.params()?),
            ExperimentKind::Converge => Plan::Converge(self.params()?),
            ExperimentKind::RicciCheck => Plan::RicciCheck(self.params()?),
            ExperimentKind::Packing => Plan::Packing(self.params()?),
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn default_radii() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FkTableParams {
    pub curvatures: Vec<f64>,
    pub thetas: Vec<f64>,
    pub lengths: Vec<f64>,
}

impl Default for FkTableParams {
    fn default() -> Self {
        Self {
            curvatures: vec![1.0, 0.0, -1.0],
            thetas: (0..=6).map(|i| PI * i as f64 / 6.0).collect(),
            lengths: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Spaceform,
    Glued,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsotropyParams {
    pub surface: SurfaceKind,
    pub k: f64,
    pub k2: f64,
    /// Neck radius of a glued surface.
    pub r: f64,
    /// Distance of the glued base point from the excised center.
    pub d: f64,
    /// Largest geodesic length; defaults to 1 on space forms and `d - r` on
    /// glued surfaces.
    pub radius: Option<f64>,
    pub n_dirs: usize,
    pub epsilon_target: f64,
}

impl Default for IsotropyParams {
    fn default() -> Self {
        Self {
            surface: SurfaceKind::Spaceform,
            k: 0.0,
            k2: 0.0,
            r: 0.05,
            d: 1.0,
            radius: None,
            n_dirs: 12,
            epsilon_target: 0.5,
        }
    }
}

impl IsotropyParams {
    fn radius(&self) -> f64 {
        self.radius.unwrap_or(match self.surface {
            SurfaceKind::Spaceform => 1.0,
            SurfaceKind::Glued => self.d - self.r,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhdistParams {
    /// Finite metric spaces in text format; when absent, balls in the
    /// surfaces of curvature `kx` and `ky` are sampled.
    pub x_file: Option<PathBuf>,
    pub y_file: Option<PathBuf>,
    pub kx: f64,
    pub ky: f64,
    pub radius: f64,
    pub spacing: f64,
    pub effort: usize,
    pub restarts: usize,
}

impl Default for GhdistParams {
    fn default() -> Self {
        Self {
            x_file: None,
            y_file: None,
            kx: 0.0,
            ky: 1.0,
            radius: 1.0,
            spacing: 0.2,
            effort: 40,
            restarts: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergeMeasure {
    Gh,
    Isotropy,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeParams {
    pub k1: f64,
    pub k2: f64,
    pub radii: Vec<f64>,
    pub measure: ConvergeMeasure,
    pub ball_radius: f64,
    pub net_spacing: f64,
    pub epsilon_target: f64,
    pub effort: usize,
    /// Base distance for the isotropy measure.
    pub d: f64,
    pub n_dirs: usize,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        Self {
            k1: 0.0,
            k2: 0.0,
            radii: default_radii(),
            measure: ConvergeMeasure::Gh,
            ball_radius: 1.0,
            net_spacing: 0.05,
            epsilon_target: 0.5,
            effort: 6,
            d: 1.0,
            n_dirs: 12,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RicciParams {
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub h: f64,
    pub radii: Vec<f64>,
}

impl Default for RicciParams {
    fn default() -> Self {
        Self {
            n: 2,
            k1: 0.0,
            k2: 0.0,
            h: 0.0,
            radii: vec![0.1, 0.01],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PackingParams {
    pub k: f64,
    /// Unused; accepted so the `flat` preset applies uniformly.
    pub k2: f64,
    pub t: f64,
    pub s: Vec<f64>,
    pub spacing: f64,
}

impl Default for PackingParams {
    fn default() -> Self {
        Self {
            k: 0.0,
            k2: 0.0,
            t: 1.0,
            s: vec![0.1, 0.2, 0.3, 0.5],
            spacing: 0.1,
        }
    }
}

/// Validated parameters of one experiment.
#[derive(Clone, Debug)]
pub enum Plan {
    FkTable(FkTableParams),
    Isotropy(IsotropyParams),
    Ghdist(GhdistParams),
    Converge(ConvergeParams),
    RicciCheck(RicciParams),
    Packing(PackingParams),
}

fn check_curvature(name: &str, k: f64) -> Result<()> {
    if k.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {k} must be finite")))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition(format!("{name} = {x} must be positive")))
    }
}

/// Lengths within the model diameter for `k > 0`.
fn check_reach(name: &str, k: f64, x: f64) -> Result<()> {
    if k > 0.0 && x > PI / k.sqrt() {
        return Err(Error::precondition(format!(
            "{name} = {x} exceeds the diameter {} of the sphere K = {k}",
            PI / k.sqrt()
        )));
    }
    Ok(())
}

fn check_schedule(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Config("radius schedule is empty".into()));
    }
    for &r in radii {
        check_positive("r", r)?;
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::precondition("radius schedule must be strictly decreasing"));
    }
    Ok(())
}

impl Plan {
    fn validate(&self) -> Result<()> {
        match self {
            Plan::FkTable(p) => {
                for &k in &p.curvatures {
                    check_curvature("curvature", k)?;
                    for &l in &p.lengths {
                        if !(l >= 0.0) {
                            return Err(Error::precondition(format!("length {l} must be >= 0")));
                        }
                        check_reach("length", k, l)?;
                    }
                }
                if p.thetas.iter().any(|&th| !(0.0..=PI).contains(&th)) {
                    return Err(Error::precondition("angles must lie in [0, pi]"));
                }
            }
            Plan::Isotropy(p) => {
                check_curvature("k", p.k)?;
                check_curvature("k2", p.k2)?;
                check_positive("radius", p.radius())?;
                if p.n_dirs == 0 {
                    return Err(Error::Config("n_dirs must be positive".into()));
                }
                match p.surface {
                    SurfaceKind::Spaceform => {
                        if p.k > 0.0 && p.radius() >= PI / p.k.sqrt() {
                            return Err(Error::precondition("radius must stay below the injectivity radius"));
                        }
                    }
                    SurfaceKind::Glued => {
                        check_glued(p.k, p.k2, p.r, p.epsilon_target)?;
                        if !(p.d > p.r) || p.radius() > p.d - p.r {
                            return Err(Error::precondition(format!(
                                "need d > r and radius <= d - r, got d = {}, r = {}, radius = {}",
                                p.d,
                                p.r,
                                p.radius()
                            )));
                        }
                        check_reach("d + radius", p.k, p.d + p.radius())?;
                    }
                }
            }
            Plan::Ghdist(p) => {
                if p.x_file.is_some() != p.y_file.is_some() {
                    return Err(Error::Config("give both x_file and y_file or neither".into()));
                }
                if p.x_file.is_none() {
                    check_curvature("kx", p.kx)?;
                    check_curvature("ky", p.ky)?;
                    check_positive("radius", p.radius)?;
                    check_positive("spacing", p.spacing)?;
                    check_reach("radius", p.kx, p.radius)?;
                    check_reach("radius", p.ky, p.radius)?;
                }
            }
            Plan::Converge(p) => {
                check_curvature("k1", p.k1)?;
                check_curvature("k2", p.k2)?;
                check_schedule(&p.radii)?;
                for &r in &p.radii {
                    check_glued(p.k1, p.k2, r, p.epsilon_target)?;
                }
                match p.measure {
                    ConvergeMeasure::Gh => {
                        check_positive("ball_radius", p.ball_radius)?;
                        check_positive("net_spacing", p.net_spacing)?;
                        check_reach("ball_radius", p.k1, p.ball_radius)?;
                        check_reach("ball_radius", p.k2, p.ball_radius)?;
                    }
                    ConvergeMeasure::Isotropy => {
                        if !(p.d > p.radii[0]) {
                            return Err(Error::precondition(format!(
                                "d = {} must exceed every radius",
                                p.d
                            )));
                        }
                        check_reach("2d", p.k1, 2.0 * p.d)?;
                    }
                }
            }
            Plan::RicciCheck(p) => {
                if p.n == 0 {
                    return Err(Error::Config("dimension n must be positive".into()));
                }
                for (name, k) in [("k1", p.k1), ("k2", p.k2), ("h", p.h)] {
                    check_curvature(name, k)?;
                }
                if p.h > p.k1.min(p.k2) {
                    return Err(Error::precondition(format!("H = {} exceeds min(K1, K2)", p.h)));
                }
                if p.radii.is_empty() {
                    return Err(Error::Config("radius list is empty".into()));
                }
                for &r in &p.radii {
                    check_positive("r", r)?;
                    for k in [p.k1, p.k2, p.h] {
                        check_reach("3r", k, 3.0 * r)?;
                    }
                }
            }
            Plan::Packing(p) => {
                check_curvature("k", p.k)?;
                check_positive("t", p.t)?;
                check_positive("spacing", p.spacing)?;
                check_reach("t", p.k, p.t)?;
                for &s in &p.s {
                    check_positive("s", s)?;
                }
            }
        }
        Ok(())
    }
}

/// Exit status for an error: 1 for config problems, 2 for violated
/// preconditions, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 1,
        Error::Domain(_)
        | Error::InvalidPoint(_)
        | Error::Precondition(_)
        | Error::InsufficientDirections(_)
        | Error::Disconnected(_) => 2,
        Error::NonConvergence(_) | Error::DomainExit { .. } | Error::Degenerate(_) | Error::NoSolution(_) => 3,
    }
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(config: &ExperimentConfig) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# isolab {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# experiment {}", config.experiment.name());
        let _ = writeln!(text, "# config-sha256 {}", config.hash());
        let _ = writeln!(text, "# seed {}", config.seed);
        Self { text }
    }

    fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    fn header(&mut self, columns: &str) {
        let _ = writeln!(self.text, "{columns}");
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }
}

/// Runs the experiment and returns the artifact text. Nothing is computed
/// before the parameters pass validation.
pub fn run(config: &ExperimentConfig) -> Result<String> {
    let plan = config.plan()?;
    let mut out = Csv::new(config);
    match plan {
        Plan::FkTable(p) => fk_table(&p, &mut out)?,
        Plan::Isotropy(p) => isotropy(&p, &mut out)?,
        Plan::Ghdist(p) => ghdist(&p, config.seed, &mut out)?,
        Plan::Converge(p) => converge(&p, config.seed, &mut out)?,
        Plan::RicciCheck(p) => ricci(&p, &mut out)?,
        Plan::Packing(p) => packing(&p, config.seed, &mut out)?,
    }
    Ok(out.text)
}

/// Writes `text` to `path` through a temporary sibling, so a failed write
/// leaves no partial file.
pub fn write_artifact(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn fk_table(p: &FkTableParams, out: &mut Csv) -> Result<()> {
    out.comment("columns: curvature K, angle theta, side lengths s and t, third side F_K(theta, s, t)");
    out.header("curvature,theta,s,t,F");
    for &k in &p.curvatures {
        for &th in &p.thetas {
            for &s in &p.lengths {
                for &t in &p.lengths {
                    let f = law_of_cosines(k, th, s, t)?;
                    out.row(&[fmt_num(k), fmt_num(th), fmt_num(s), fmt_num(t), fmt_num(f)]);
                }
            }
        }
    }
    Ok(())
}

fn isotropy(p: &IsotropyParams, out: &mut Csv) -> Result<()> {
    let radius = p.radius();
    let grid = IsotropyGrid::standard(radius);
    let est = match p.surface {
        SurfaceKind::Spaceform => {
            let m = SpaceFormParams::surface(p.k)?;
            out.comment(&format!("surface: space form K = {}, base point at the origin", p.k));
            estimate_f(&m, &m.origin(), radius, p.n_dirs, &grid, None)?
        }
        SurfaceKind::Glued => {
            let g = build_glued(p.k, p.k2, p.r, p.epsilon_target)?;
            let base = g.exterior(Side::One, p.d, 0.0)?;
            let bad = bad_directions(&g, &base, &Region::Neck, p.d, DIRECTION_COUNT)?;
            let cap = unseen_check(&bad, PI)
                .map(|c| c.caps.iter().map(|c| c.radius).fold(0.0, f64::max))
                .unwrap_or(PI);
            out.comment(&format!(
                "surface: glued K1 = {}, K2 = {}, r = {}, base point on side 1 at distance {}",
                p.k, p.k2, p.r, p.d
            ));
            out.comment(&format!("directions meeting the neck: {} of {}, cap radius {}", bad.bad_count(), bad.count(), fmt_num(cap)));
            estimate_f(&g, &base, radius, p.n_dirs, &grid, Some(&bad))?
        }
    };
    let report = verify_axioms(&est, radius);
    out.comment(&format!("defect {}", fmt_num(est.defect())));
    if report.passed() {
        out.comment("axioms: all checks pass");
    } else {
        for v in &report.violations {
            out.comment(&format!("axiom violation {:?} at cell {:?}: {}", v.axiom, v.cell, v.detail));
        }
    }
    out.comment("columns: angle theta, lengths s and t, mean endpoint distance, max minus min distance, pairs sampled");
    // The estimate's own CSV carries the column header.
    out.text.push_str(&est.to_csv());
    Ok(())
}

fn ghdist(p: &GhdistParams, seed: u64, out: &mut Csv) -> Result<()> {
    let (x, y) = match (&p.x_file, &p.y_file) {
        (Some(a), Some(b)) => (FiniteMetricSpace::read_text(a)?, FiniteMetricSpace::read_text(b)?),
        _ => {
            let sample = |k: f64, s: u64| -> Result<FiniteMetricSpace> {
                let m = SpaceFormParams::surface(k)?;
                epsilon_net_sample(&m, &m.origin(), p.radius, p.spacing, NetOptions::seeded(s))
            };
            out.comment(&format!(
                "balls of radius {} in K = {} and K = {}, net spacing {}",
                p.radius, p.kx, p.ky, p.spacing
            ));
            (sample(p.kx, seed)?, sample(p.ky, seed.wrapping_add(1))?)
        }
    };
    let est = gh_upper(
        &x,
        &y,
        &GhOptions {
            effort: p.effort,
            restarts: p.restarts,
            seed,
            hints: Vec::new(),
        },
    )?;
    let lower = gh_lower(&x, &y);
    out.comment("columns: sample sizes, upper and lower bounds on the Gromov-Hausdorff distance, whether the upper bound is exact");
    out.header("n_x,n_y,gh_upper,gh_lower,exact");
    out.row(&[
        x.len().to_string(),
        y.len().to_string(),
        fmt_num(est.upper),
        fmt_num(lower),
        est.exact.to_string(),
    ]);
    Ok(())
}

fn converge(p: &ConvergeParams, seed: u64, out: &mut Csv) -> Result<()> {
    match p.measure {
        ConvergeMeasure::Gh => {
            let rows = convergence_experiment(&ConvergenceSettings {
                k1: p.k1,
                k2: p.k2,
                radii: p.radii.clone(),
                ball_radius: p.ball_radius,
                net_spacing: p.net_spacing,
                epsilon_target: p.epsilon_target,
                seed,
                effort: p.effort,
            })?;
            out.comment("columns: neck radius, sample sizes of the glued and wedge balls, GH upper and lower bounds, neck diameter, net spacing plus neck diameter, status");
            out.header("r,n_x,n_y,gh_upper,gh_lower,neck_diameter,budget,status");
            for row in rows {
                out.row(&[
                    fmt_num(row.r),
                    row.samples_x.to_string(),
                    row.samples_y.to_string(),
                    fmt_num(row.gh_upper),
                    fmt_num(row.gh_lower),
                    fmt_num(row.neck_diameter),
                    fmt_num(row.budget),
                    status(&row.error),
                ]);
            }
        }
        ConvergeMeasure::Isotropy => {
            let rows = isotropy_convergence(p.k1, p.k2, &p.radii, p.d, p.epsilon_target, p.n_dirs)?;
            out.comment("columns: neck radius, max deviation from the space form triangle function, defect, measured neck cap radius, predicted cap radius, status");
            out.header("r,max_deviation,defect,cap_radius,expected_cap,status");
            for row in rows {
                out.row(&[
                    fmt_num(row.r),
                    format!("{:e}", row.max_deviation),
                    format!("{:e}", row.defect),
                    fmt_num(row.cap_radius),
                    fmt_num(row.expected_cap),
                    status(&row.error),
                ]);
            }
        }
    }
    Ok(())
}

fn status(error: &Option<String>) -> String {
    match error {
        None => "ok".into(),
        Some(e) => format!("\"failed: {}\"", e.replace('"', "'")),
    }
}

fn ricci(p: &RicciParams, out: &mut Csv) -> Result<()> {
    let rows = ricci_violation(p.n, p.k1, p.k2, p.h, &p.radii)?;
    out.comment(&format!("n = {}, K1 = {}, K2 = {}, H = {}", p.n, p.k1, p.k2, p.h));
    out.comment("columns: radius r, annulus ratio allowed by volume comparison, annulus ratio of the wedge, VIOLATED when the first is smaller");
    out.header("r,lhs,rhs,status");
    for row in rows {
        out.row(&[
            fmt_num(row.r),
            fmt_num(row.lhs),
            fmt_num(row.rhs),
            if row.violated { "VIOLATED" } else { "ok" }.into(),
        ]);
    }
    Ok(())
}

fn packing(p: &PackingParams, seed: u64, out: &mut Csv) -> Result<()> {
    let m = SpaceFormParams::surface(p.k)?;
    let x = epsilon_net_sample(&m, &m.origin(), p.t, p.spacing, NetOptions::seeded(seed))?;
    out.comment(&format!("net of the ball of radius {} in K = {}, spacing {}, {} points", p.t, p.k, p.spacing, x.len()));
    out.comment("columns: small radius s, ball radius t, packing count bounds, whether exact, volume ratio ceiling");
    out.header("s,t,lower,upper,exact,ceiling");
    for &s in &p.s {
        let count = packing_number(&x, s, p.t, 0);
        let ceiling = bishop_gromov_ceiling(2, p.k, s, p.t)?;
        out.row(&[
            fmt_num(s),
            fmt_num(p.t),
            count.lower().to_string(),
            count.upper().to_string(),
            count.is_exact().to_string(),
            fmt_num(ceiling),
        ]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ricci_flat_row() {
        let mut c = ExperimentConfig::new(ExperimentKind::RicciCheck);
        c.apply_override("n=2").unwrap();
        c.apply_override("flat").unwrap();
        let text = run(&c).unwrap();
        assert!(text.starts_with("# isolab "));
        assert!(text.lines().any(|l| l.ends_with(",8,9,VIOLATED")), "{text}");
    }

    #[test]
    fn overrides_parse_as_toml() {
        let mut c = ExperimentConfig::new(ExperimentKind::Converge);
        c.apply_override("radii=[0.2, 0.1]").unwrap();
        c.apply_override("measure=isotropy").unwrap();
        assert_eq!(c.parameters["measure"].as_str(), Some("isotropy"));
        assert_eq!(c.parameters["radii"].as_array().unwrap().len(), 2);
        assert!(c.apply_override("steep").is_err());
    }

    #[test]
    fn config_errors_and_preconditions() {
        assert!(matches!(ExperimentConfig::parse("experiment = 3", None), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("seed = 1", None), Err(Error::Config(_))));
        let c = ExperimentConfig::parse("experiment = \"ricci-check\"\n[parameters]\nbogus = 1\n", None).unwrap();
        assert_eq!(exit_code(&run(&c).unwrap_err()), 1);
        let c = ExperimentConfig::parse("experiment = \"converge\"\n[parameters]\nradii = [0.1, 0.2]\n", None).unwrap();
        assert_eq!(exit_code(&run(&c).unwrap_err()), 2);
        let c = ExperimentConfig::parse("experiment = \"converge\"\n[parameters]\nradii = [0.3]\nepsilon_target = 0.2\n", None)
            .unwrap();
        let e = run(&c).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("F_K(eps, eps, eps)"));
    }

    #[test]
    fn hash_ignores_output_path() {
        let mut a = ExperimentConfig::new(ExperimentKind::FkTable);
        let mut b = a.clone();
        b.output_path = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        a.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
