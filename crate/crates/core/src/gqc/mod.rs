//! Geometric phase gates: adiabatic loops, nonadiabatic cyclic evolutions and
//! unconventional (dynamical phase proportional to geometric phase) schemes.

mod adiabatic;
mod nonadiabatic;
mod unconventional;

pub use adiabatic::*;
pub use nonadiabatic::*;
pub use unconventional::*;
