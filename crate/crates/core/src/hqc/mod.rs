//! Holonomic gate schemes: Λ, tripod, four-level and XY-auxiliary systems, plus reverse
//! engineering of Hamiltonians from prescribed paths.

mod fourlevel;
mod lambda;
mod reverse;
mod tripod;

pub use fourlevel::*;
pub use lambda::*;
pub use reverse::*;
pub use tripod::*;
