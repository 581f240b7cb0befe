//! Dense complex linear algebra, operator construction and time-ordered propagation.

mod linalg;
mod propagate;
mod pulse;
mod schedule;
mod sequence;
mod tolerance;
mod twoqubit;

pub use linalg::*;
pub use propagate::*;
pub use pulse::PulseShape;
pub use schedule::*;
pub use sequence::*;
pub use tolerance::ToleranceConfig;
pub use twoqubit::*;
