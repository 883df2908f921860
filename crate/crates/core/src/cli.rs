//! Command-line front end for [`crate::experiment`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{exit_code, run, write_artifact, ExperimentConfig, ExperimentKind};

#[derive(Parser, Debug)]
#[command(name = "isolab", version, about = "Run a configured isotropy or convergence experiment and write CSV")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config with `experiment`, `seed`, `output` and `[parameters]`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for sampling and search; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "ISOLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// `key=value` parameter overrides (TOML values) or the preset `flat`.
    #[arg(trailing_var_arg = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Triangle function table.
    ///
    /// Columns: curvature,theta,s,t,F.
    /// Parameters: curvatures, thetas, lengths.
    FkTable(Overrides),
    /// Sampled isotropy function about a point.
    ///
    /// Columns: theta,s,t,F_hat,spread,n_samples.
    /// Parameters: surface (spaceform | glued), k, k2, r, d, radius, n_dirs,
    /// epsilon_target.
    Isotropy(Overrides),
    /// Gromov-Hausdorff bounds between two finite metric spaces.
    ///
    /// Columns: n_x,n_y,gh_upper,gh_lower,exact.
    /// Parameters: x_file and y_file, or kx, ky, radius, spacing; effort,
    /// restarts.
    Ghdist(Overrides),
    /// Glued surfaces against the wedge for shrinking necks.
    ///
    /// Columns with measure = gh: r,n_x,n_y,gh_upper,gh_lower,neck_diameter,budget,status.
    /// Columns with measure = isotropy: r,max_deviation,defect,cap_radius,expected_cap,status.
    /// Parameters: k1, k2, radii, measure, ball_radius, net_spacing,
    /// epsilon_target, effort, d, n_dirs.
    Converge(Overrides),
    /// Volume comparison on annuli around a wedge junction.
    ///
    /// Columns: r,lhs,rhs,status.
    /// Parameters: n, k1, k2, h, radii.
    RicciCheck(Overrides),
    /// Ball packing counts on a sampled space form ball.
    ///
    /// Columns: s,t,lower,upper,exact,ceiling.
    /// Parameters: k, t, s, spacing.
    Packing(Overrides),
}

impl Command {
    fn split(self) -> (ExperimentKind, Vec<String>) {
        match self {
            Command::FkTable(o) => (ExperimentKind::FkTable, o.overrides),
            Command::Isotropy(o) => (ExperimentKind::Isotropy, o.overrides),
            Command::Ghdist(o) => (ExperimentKind::Ghdist, o.overrides),
            Command::Converge(o) => (ExperimentKind::Converge, o.overrides),
            Command::RicciCheck(o) => (ExperimentKind::RicciCheck, o.overrides),
            Command::Packing(o) => (ExperimentKind::Packing, o.overrides),
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (kind, overrides) = cli.command.split();
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::read(path, Some(kind))?,
        None => ExperimentConfig::new(kind),
    };
    for token in &overrides {
        config.apply_override(token)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_path = Some(out);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let text = pool.install(|| run(&config))?;
    match &config.output_path {
        Some(path) => write_artifact(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the experiment and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("isolab: {e}");
            exit_code(&e)
        }
    }
}
