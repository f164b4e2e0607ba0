//! Constant mean curvature Killing graphs in the half-space model of hyperbolic space.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: the half-space model, isometries, the parabolic and hyperbolic
//!   Killing structures and a catalog of closed-form graphs.
//! * [`operator`]: the Killing-graph mean curvature operator, pointwise and on grids,
//!   together with an independent parametric mean-curvature oracle.
//! * [`barriers`]: stacked-hemisphere lower barriers, equidistant supersolutions and
//!   upper caps.
//! * [`solver`]: a damped Newton Dirichlet solver for the discrete operator.
//! * [`perron`]: the Perron engine driving the asymptotic Dirichlet problem.
//! * [`cli`]: configuration, scenario dispatch and output files for the `plateau-hyp` binary.

pub mod barriers;
pub mod cli;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod perron;
pub mod solver;

pub use geometry::{AmbientPoint, ChartPoint, ExactSolution, IdealPoint, IdealSphere, Isometry, KillingKind};
pub use grid::{Grid, GridFunction};
pub use operator::{fix_orientation_sign, OrientationConvention};

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("no graph solution detected: {0}")]
    Divergence(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("orientation anchors disagree: {0}")]
    Orientation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
