//! Geometric phases, quantum holonomies and holonomic gate synthesis for small
//! quantum systems (ħ = 1, angles in radians, frequencies in angular units).

pub mod error;
pub mod geometry;
pub mod gqc;
pub mod grape;
pub mod hqc;
pub mod protect;
pub mod qcore;

pub use error::{Error, Result};
pub use qcore::{ComplexOperator, ControlSchedule, EvolutionRecord, Ket, ToleranceConfig};
