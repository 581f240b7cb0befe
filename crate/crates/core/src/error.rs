use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian: ‖H−H†‖_F = {residual:.3e} exceeds {tolerance:.1e}·‖H‖_F")]
    Hermiticity { residual: f64, tolerance: f64 },
    #[error("operator is not unitary: ‖U†U−I‖_F = {residual:.3e} exceeds {tolerance:.1e}")]
    Unitarity { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a projector: {0}")]
    Projector(String),
    #[error("evolution is not cyclic: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotCyclic { residual: f64, tolerance: f64 },
    #[error("degeneracy structure broken at sample {sample}: {detail}")]
    Degeneracy { sample: usize, detail: String },
    #[error("frame error: {0}")]
    Frame(String),
    #[error("pulse sequence error: {0}")]
    Sequence(String),
    #[error("division by zero: {0}")]
    Division(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("constraint not satisfied: {0}")]
    Constraint(String),
    #[error("cyclicity violated: {0}")]
    Cyclicity(String),
    #[error("pulse shape error: {0}")]
    PulseShape(String),
    #[error("segment chain broken at segment {index}: {detail}")]
    SegmentChain { index: usize, detail: String },
    #[error("coupling block is reducible (det S = {det:.3e}); use the three-level reduction")]
    Reducible { det: f64 },
    #[error("incommensurate parameters: {0}")]
    Commensurability(String),
    #[error("leakage {leakage:.3e} exceeds {tolerance:.1e}")]
    Leakage { leakage: f64, tolerance: f64 },
    #[error("model error: {0}")]
    Model(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
