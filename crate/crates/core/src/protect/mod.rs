//! Decoherence-free and noiseless-subsystem encodings, dynamical decoupling and
//! quasi-static noise models.

mod codes;
mod dd;
mod noise;

pub use codes::*;
pub use dd::*;
pub use noise::*;
