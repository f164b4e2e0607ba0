//! The Killing-graph mean curvature operator.
//!
//! [`pointwise`] evaluates it on smooth patches (a generic form driven by the Killing
//! structure, and the simplified parabolic form), [`discrete`] on grids, and [`oracle`]
//! computes mean curvature of parametric hypersurfaces independently to fix the sign
//! relating the two.

pub mod discrete;
pub mod oracle;
pub mod pointwise;

pub use discrete::{max_interior_residual, qh_residual_grid, DiscreteOperator};
pub use oracle::{drift_from_flow, fix_orientation_sign, gamma_from_metric, killing_graph_patch, numerical_mean_curvature, NormalOrientation, OrientationConvention};
pub use pointwise::{killing_operator, parabolic_reduced, q_value, qh_pointwise, FdPatch, ScalarPatch};
