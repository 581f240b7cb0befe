//! Fixtures shared by the criterion benches in `benches/`.

use hforge_core::grape::{GrapeProblem, NvScenario};
use hforge_core::protect::DdModel;
use hforge_core::qcore::*;
use nalgebra::DMatrix;

/// The NV Hadamard problem with `segments` controls and its Λ-scheme starting point.
pub fn nv_fixture(segments: usize) -> (NvScenario, GrapeProblem, DMatrix<f64>) {
    let sc = NvScenario { segments, ..NvScenario::default() };
    let problem = sc.hadamard_problem().expect("nv problem");
    let w0 = sc.lambda_hadamard_controls(&problem).expect("Λ controls");
    (sc, problem, w0)
}

/// Random Hermitian matrix of size `n` from a fixed LCG, so runs compare like with like.
pub fn hermitian(n: usize, seed: u64) -> ComplexOperator {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let a = ComplexOperator::from_fn(n, n, |_, _| c(next(), next()));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// One system qubit coupled to one environment qubit.
pub fn dd_model() -> DdModel {
    DdModel {
        system_qubits: 1,
        h_e: pauli_x() * c(0.8, 0.0) + pauli_z() * c(0.3, 0.0),
        h_i: vec![(pauli_z(), pauli_y() * c(0.5, 0.0)), (pauli_y(), pauli_x() * c(0.4, 0.0))],
    }
}
