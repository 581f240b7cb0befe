//! Abelian phases and non-Abelian holonomies extracted from evolutions and parameter loops.

mod frame;
mod loops;
mod phase;

pub use frame::*;
pub use loops::*;
pub use phase::*;
