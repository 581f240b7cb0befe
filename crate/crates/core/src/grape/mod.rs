//! Gradient-ascent pulse engineering for holonomic gates, with a penalty on the dynamical
//! matrix and noise-averaged objectives.

mod nv;
mod objective;
mod optimize;
mod problem;
mod robust;

pub use nv::NvScenario;
pub use objective::{objective, objective_gradient, objective_parts, GradientMode, ObjectiveParts};
pub use optimize::{grape_optimize, GrapeConfig, OptimizedControls, RobustSpec};
pub use problem::{random_controls, GrapeProblem};
pub use robust::*;
