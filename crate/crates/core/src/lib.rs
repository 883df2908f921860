//! `isolab` builds synthetic Riemannian surfaces and measures how close they
//! come to being isotropic.
//!
//! The crate is organised bottom-up:
//!
//! - [`spaceform`]: constant-curvature models, the triangle function
//!   `F_K(theta, s, t)`, angle inversion and ball volumes.
//! - [`warped`]: warped products `dt^2 + f(t)^2 dphi^2`, geodesic shooting and
//!   radial curvature.
//! - [`neck`]: two space forms with small balls removed, joined by a
//!   Schwarzschild-type neck.
//! - [`metricspace`]: finite metric spaces, nets, ball packing and
//!   Gromov-Hausdorff bounds.
//! - [`isotropy`]: sampled isotropy functions, defects and direction caps.
//! - [`wedge`]: space forms glued at points, plus the convergence and volume
//!   experiments.
//! - [`experiment`] and [`cli`]: config-driven runner used by the `isolab`
//!   binary.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod isotropy;
pub mod metricspace;
pub mod neck;
pub mod numeric;
pub mod spaceform;
pub mod warped;
pub mod wedge;

pub use error::{Error, Result};
